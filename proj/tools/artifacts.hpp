#pragma once

#include <iosfwd>
#include <string>

#include "nulllab/experiments.hpp"
#include "nulllab/mass_flux.hpp"

namespace nulllab::cli {

/// Columns s, q, component, value for Gaussian data under the given quadratic spec.
std::string asym_csv(std::istream& spec, double s_max, double ds);

/// "bracket:<p>", "gaussian:<c>", or a file of "q,n" rows read as a spherical profile.
SourceProfile load_profile(const std::string& what);

/// Columns t, x1, x2, x3, value, est_error at the points (t, x1, x2, x3) read from pts.
std::string backscatter_csv(const std::string& kernel, const SourceProfile& n, std::istream& pts);

/// kirchhoff | solve: columns u, v, r, value. extract | model: columns q, U, rate and q, alpha, beta.
std::string oracle_csv(const std::string& mode);

/// Columns curve, qstar, t, x1, x2, x3, utilde, W0..W3, residual for labels q* on [-8, 0].
std::string eikonal_csv(const std::string& metric, double T, int grid, const ExperimentConfig& c);

/// Rows "q*, theta, phi, V11, V12" with V22 = -V11 on a Gauss-Legendre x uniform sphere grid.
TangentialRadiationData load_radiation_csv(std::istream& in);

/// E(q*) on the data grid, the mass result and, when requested, the closure table.
struct MassArtifacts {
  std::string energy_csv;
  std::string closure_csv;
  MassResult mass;
  double closure_ratio = 0.0;  // max discrepancy / bound over the table
};
MassArtifacts mass_artifacts(const TangentialRadiationData& data, bool check_closure, double gamma_prime);

}  // namespace nulllab::cli
