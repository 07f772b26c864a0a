#include "artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "nulllab/asym_system.hpp"
#include "nulllab/eikonal.hpp"
#include "nulllab/wave_oracle.hpp"

namespace nulllab::cli {

namespace {

double bump(double x) { return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; }

std::vector<double> split_numbers(const std::string& line, const std::string& what, int lineno) {
  std::vector<double> out;
  std::stringstream ls(line);
  for (std::string tok; std::getline(ls, tok, ',');) {
    size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || tok.find_first_not_of(" \t\r", used) != std::string::npos)
      throw ValidationError(what + " line " + std::to_string(lineno) + ": bad number '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

bool is_header(const std::string& line) {
  const auto p = line.find_first_not_of(" \t");
  return p != std::string::npos && (std::isalpha(static_cast<unsigned char>(line[p])) || line[p] == '#');
}

/// Reads comma-separated rows of exactly n numbers, skipping blank lines and a leading header.
std::vector<std::vector<double>> read_rows(std::istream& in, size_t n, const std::string& what) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (rows.empty() && is_header(line)) continue;
    auto r = split_numbers(line, what, lineno);
    if (r.size() != n)
      throw ValidationError(what + " line " + std::to_string(lineno) + ": expected " + std::to_string(n) + " columns");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ValidationError(what + ": no data rows");
  return rows;
}

std::string row(std::initializer_list<double> xs) {
  std::string s;
  for (double x : xs) s += (s.empty() ? "" : ",") + format_number(x);
  return s + "\n";
}

}  // namespace

std::string asym_csv(std::istream& spec_in, double s_max, double ds) {
  const QuadraticSpec spec = parse_quadratic_spec(spec_in);
  AsymGrid g;
  g.dq = 0.05;
  g.s_max = s_max;
  g.ds = ds;
  g.save_every = std::max(1, static_cast<int>(std::lround(0.5 / ds)));
  const auto q = q_grid(g);
  std::vector<double> data(q.size());
  for (size_t i = 0; i < q.size(); ++i) data[i] = std::exp(-0.5 * q[i] * q[i]);
  const auto coeffs = build_asym_coeffs(spec, Vec3::UnitZ());
  const auto st = integrate_asym_system(coeffs, std::vector<std::vector<double>>(spec.components, data), g);
  std::string s = "s,q,component,value\n";
  for (const auto& snap : st.history)
    for (size_t c = 0; c < snap.phi.size(); ++c)
      for (size_t i = 0; i < q.size(); ++i) s += row({snap.s, q[i], static_cast<double>(c), snap.phi[c][i]});
  return s;
}

SourceProfile load_profile(const std::string& what) {
  const auto colon = what.find(':');
  if (colon != std::string::npos) {
    const std::string kind = what.substr(0, colon);
    double v = 0.0;
    try {
      v = std::stod(what.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("profile '" + what + "': bad parameter");
    }
    if (kind == "bracket") return bracket_power_profile(v);
    if (kind == "gaussian") return gaussian_profile(v);
    throw ValidationError("profile '" + what + "': unknown builtin");
  }
  std::ifstream f(what);
  if (!f) throw ValidationError("profile file '" + what + "' cannot be read");
  auto rows = read_rows(f, 2, "profile");
  std::sort(rows.begin(), rows.end());
  std::vector<double> qs, ns;
  for (const auto& r : rows) {
    if (!qs.empty() && r[0] <= qs.back()) throw ValidationError("profile: repeated q value");
    qs.push_back(r[0]);
    ns.push_back(r[1]);
  }
  SourceProfile p;
  p.n = [qs, ns](double q, const Vec3&) {
    if (q < qs.front() || q > qs.back()) return 0.0;
    const size_t k = std::min<size_t>(std::upper_bound(qs.begin(), qs.end(), q) - qs.begin(), qs.size() - 1);
    if (k == 0) return ns[0];
    const double w = (q - qs[k - 1]) / (qs[k] - qs[k - 1]);
    return (1.0 - w) * ns[k - 1] + w * ns[k];
  };
  p.a = 1.0;
  p.spherical = true;
  p.name = what;
  return p;
}

std::string backscatter_csv(const std::string& kernel, const SourceProfile& n, std::istream& pts) {
  std::string s = "t,x1,x2,x3,value,est_error\n";
  for (const auto& r : read_rows(pts, 4, "points")) {
    const double t = r[0];
    const Vec3 x(r[1], r[2], r[3]);
    const double rad = x.norm();
    const Vec3 om = rad > 0.0 ? Vec3(x / rad) : Vec3::UnitZ();
    QuadResult v;
    if (kernel == "F") {
      v.value = eval_source(n, t, x);
    } else if (kernel == "phi") {
      v = phi_exact(n, t, x);
    } else if (kernel == "phi1") {
      v = phi1(n, t, rad, om);
    } else if (kernel == "phi1plus") {
      v = phi1_plus(n, t, rad, om);
    } else if (kernel == "phi2") {
      v = phi2(n, t, x);
    } else {
      throw ValidationError("unknown kernel '" + kernel + "'");
    }
    s += row({t, x.x(), x.y(), x.z(), v.value, v.error});
  }
  return s;
}

std::string oracle_csv(const std::string& mode) {
  if (mode == "kirchhoff") {
    KirchhoffData k;
    k.w0 = [](const Vec3& y) { return bump(y.norm() / 3.0); };
    k.w1 = [](const Vec3& y) { return 0.5 * bump(y.norm() / 2.0); };
    k.support_radius = 3.0;
    std::string s = "u,v,r,value\n";
    for (int a = -16; a <= 16; ++a) {
      for (int b = a; b <= 16; ++b) {
        const double u = 0.5 * a, v = 0.5 * b, t = 0.5 * (u + v), r = 0.5 * (v - u);
        if (t < 0.0) continue;
        s += row({u, v, r, kirchhoff(k, t, Vec3(0, 0, r)).value});
      }
    }
    return s;
  }
  if (mode == "solve") {
    const auto n = bracket_power_profile(2.0);
    const ModeSource F = [&](double t, double r) { return r > 0.0 ? eval_source(n, t, Vec3(0, 0, r)) : 0.0; };
    const ModeGrid g = solve_mode(F, {[](double) { return 0.0; }, [](double) { return 0.0; }}, {0.05, 30.0, 45.0, 0});
    std::string s = "u,v,r,value\n";
    for (int a = -45; a <= 30; ++a) {
      for (int b = std::max(a + 1, -a); b <= 75; ++b) {
        const double u = a, v = b, t = 0.5 * (u + v), r = 0.5 * (v - u);
        if (t > 30.0 || !g.contains(t, r)) continue;
        s += row({u, v, r, g.phi(t, r)});
      }
    }
    return s;
  }
  if (mode == "extract") {
    KirchhoffData k;
    k.w0 = [](const Vec3& y) { return bump(y.norm() / 1.5) * (1.0 + 0.3 * y[0] + 0.2 * y[1] * y[2]); };
    k.support_radius = 1.5;
    const ScalarField u = [&](double t, const Vec3& x) { return kirchhoff(k, t, x).value; };
    std::vector<double> q;
    for (int i = -4; i <= 4; ++i) q.push_back(0.3 * i);
    const auto rf = extract_radiation_field(u, Vec3(1, 1, 1).normalized(), q);
    std::string s = "q,U,rate\n";
    for (size_t i = 0; i < rf.q.size(); ++i) s += row({rf.q[i], rf.u_inf[i], rf.rate[i]});
    return s;
  }
  if (mode == "model") {
    ModelSystemSpec ms;
    ms.phi1 = {[](double) { return 0.0; }, [](double r) { return r * bump(r / 2.0); }};
    ms.support = 2.0;
    ms.delta = 0.05;
    for (int i = -8; i <= 8; ++i) ms.q.push_back(0.25 * i);
    const auto rep = run_model_system(ms);
    std::string s = "q,alpha,beta\n";
    for (size_t i = 0; i < rep.q.size(); ++i) s += row({rep.q[i], rep.alpha[i], rep.beta[i]});
    return s;
  }
  throw ValidationError("unknown oracle mode '" + mode + "'");
}

std::string eikonal_csv(const std::string& metric, double T, int grid, const ExperimentConfig& c) {
  if (grid < 1) throw ValidationError("--grid must be at least 1");
  const MetricProvider m = make_metric(metric, c.mass, c.epsilon, c.gamma_prime);
  TraceOptions o;
  o.t_min = 10.0;
  std::string s = "curve,qstar,t,x1,x2,x3,utilde,W0,W1,W2,W3,residual\n";
  for (int k = 0; k < grid; ++k) {
    const double q = grid == 1 ? 0.0 : -8.0 + 8.0 * k / (grid - 1);
    const Trajectory tr = trace_characteristic(T, q, Vec3::UnitZ(), m, o);
    if (!tr.complete) throw NumericalError("eikonal: curve q* = " + format_number(q) + " failed: " + tr.failure);
    for (const auto& st : tr.states)
      s += row({static_cast<double>(k), q, st.t, st.x.x(), st.x.y(), st.x.z(), st.utilde, st.W[0], st.W[1], st.W[2],
                st.W[3], st.residual});
  }
  return s;
}

TangentialRadiationData load_radiation_csv(std::istream& in) {
  const auto rows = read_rows(in, 5, "radiation data");
  std::vector<double> qs, thetas, phis;
  for (const auto& r : rows) {
    qs.push_back(r[0]);
    thetas.push_back(r[1]);
    phis.push_back(r[2]);
  }
  auto unique_sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), v.end());
    return v;
  };
  qs = unique_sorted(qs);
  thetas = unique_sorted(thetas);
  phis = unique_sorted(phis);
  const size_t nt = thetas.size(), np = phis.size();
  if (rows.size() != qs.size() * nt * np)
    throw ValidationError("radiation data: rows do not form a full q x theta x phi grid");
  const GaussRule& gl = gauss_legendre(static_cast<int>(nt));
  for (size_t i = 0; i < nt; ++i) {
    // Increasing theta means decreasing cos(theta).
    if (std::abs(std::cos(thetas[i]) - gl.x[nt - 1 - i]) > 1e-9)
      throw ValidationError("radiation data: theta nodes are not Gauss-Legendre in cos(theta)");
  }
  for (size_t j = 1; j < np; ++j) {
    if (std::abs((phis[j] - phis[j - 1]) - 2.0 * M_PI / np) > 1e-9)
      throw ValidationError("radiation data: phi nodes are not uniformly spaced by 2 pi / n_phi");
  }
  auto index_of = [](const std::vector<double>& v, double x) {
    const auto it = std::lower_bound(v.begin(), v.end(), x - 1e-12);
    return static_cast<size_t>(it - v.begin());
  };
  TangentialRadiationData d;
  d.q = qs;
  for (size_t i = 0; i < nt; ++i) {
    for (size_t j = 0; j < np; ++j) {
      const double st = std::sin(thetas[i]);
      d.sphere.nodes.emplace_back(st * std::cos(phis[j]), st * std::sin(phis[j]), std::cos(thetas[i]));
      d.sphere.weights.push_back(0.5 * gl.w[nt - 1 - i] / np);
    }
  }
  d.v.assign(qs.size() * nt * np, {std::nan(""), 0.0, 0.0});
  for (const auto& r : rows) {
    const size_t k = d.index(index_of(qs, r[0]), index_of(thetas, r[1]) * np + index_of(phis, r[2]));
    if (!std::isnan(d.v[k][0])) throw ValidationError("radiation data: duplicate node");
    d.v[k] = {r[3], r[4], -r[3]};
  }
  return d;
}

MassArtifacts mass_artifacts(const TangentialRadiationData& data, bool check_closure, double gamma_prime) {
  const GridSource n = compute_n(data);
  const EnergyProfile e = energy_profile(n);
  MassArtifacts out;
  out.mass = mass_from_flux(e);
  out.energy_csv = "qstar,E\n";
  for (double q : n.q) out.energy_csv += row({q, e.E(q)});
  if (check_closure) {
    // The sphere-averaged kernel depends on n only through E, so a spherical 2E carries the same data.
    SourceProfile s;
    s.n = [E = e.E](double q, const Vec3&) { return 2.0 * E(q); };
    s.a = e.a;
    s.spherical = true;
    s.name = "data";
    out.closure_csv = "qstar,rstar,kll,two_M,discrepancy,bound,pass\n";
    for (double q : {-10.0, -50.0}) {
      for (double r : {1e3, 1e4, 1e5}) {
        const double kll = kll_average(s, q, r).value;
        const double disc = std::abs(kll - 2.0 * out.mass.value);
        const double bound = 2.0 * (std::abs(q) / r + std::pow(1.0 + std::abs(q), -gamma_prime)) * out.mass.value;
        out.closure_ratio = std::max(out.closure_ratio, disc / bound);
        out.closure_csv += row({q, r, kll, 2.0 * out.mass.value, disc, bound, disc <= bound ? 1.0 : 0.0});
      }
    }
  }
  return out;
}

}  // namespace nulllab::cli
