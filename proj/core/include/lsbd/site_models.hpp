#pragma once

#include <string>
#include <vector>

#include "lsbd/potential_table.hpp"

namespace lsbd {

enum class ModelKind { harmonic_phi4, custom_diagonal };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
  ModelKind kind = ModelKind::harmonic_phi4;
  int n_s = 4;
  int oscillator_basis_size = 60;
  double coupling_normalization = 0.5;
  // custom_diagonal only
  std::vector<double> levels;
  std::vector<double> site_operator;  // row-major n_s x n_s, real symmetric

  void validate() const;
};

struct SiteModel {
  SiteBasis basis;
  Matrix position;  // coupling operator on one site, in the kept eigenbasis
  RealVector raw_levels;
  double raw_ground_energy = 0.0;
  double raw_gap = 1.0;
};

struct NormalizationReport {
  double raw_weighted_norm = 0.0;
  double scale = 1.0;
  double achieved = 0.0;
};

struct InitialData {
  SiteModel site;
  std::vector<LocalOperator> pair_potentials;  // orientation j on the bond at the origin corner
  NormalizationReport normalization;

  const SiteBasis& basis() const { return site.basis; }
  LocalOperator pair_potential_on(const Rectangle& bond) const;
};

// Real symmetric matrices of x and p^2 in the oscillator basis.
Eigen::MatrixXd oscillator_position(int size);
Eigen::MatrixXd oscillator_momentum_squared(int size);

SiteModel build_phi4_site(const ModelSpec& spec);
SiteModel build_custom_site(const ModelSpec& spec);
SiteModel build_site(const ModelSpec& spec);

LocalOperator build_pair_potential(const SiteModel& site, int orientation, int d,
                                   double coupling_normalization,
                                   NormalizationReport* report = nullptr);
InitialData build_initial_data(const ModelSpec& spec, int d);

std::vector<Rectangle> bonds(const LatticeSpec& lattice);

GlobalOperator assemble_hamiltonian(const LatticeSpec& lattice, const InitialData& data, double t,
                                    Eigen::Index dense_threshold = 4096);
PotentialTable initial_table(const LatticeSpec& lattice, const InitialData& data, double t);

}  // namespace lsbd
