#pragma once

#include <span>
#include <vector>

#include "spatsurv/sampling.hpp"

namespace spatsurv {

// Unit-level correlation functions for the anticipated-variance working
// model. The variance scale sigma_u2 is applied separately; these return
// pure correlations rho(d).
enum class CovarianceKind { power, gaussian };

struct CovarianceModel {
  CovarianceKind kind = CovarianceKind::gaussian;
  double sigma_u2 = 1.0;
  double rho_base = 0.5;  // power model: rho_base^d
  double alpha = 1.0;     // gaussian model: exp(-3 (d/alpha)^2) + tau2
  double tau2 = 0.0;

  void validate() const;
};

double correlation_at(const CovarianceModel& model, double d);

// Synthetic population used by the model-based variance machinery: persons
// with positions and auxiliary vectors, grouped into clusters.
struct StudyCluster {
  double cx = 0.0, cy = 0.0;  // cluster centroid
  std::vector<double> px, py; // person positions
  std::vector<double> x;      // auxiliaries, person-major (n_i rows of x_dim)
};

struct StudyPopulation {
  int x_dim = 0;
  std::vector<StudyCluster> clusters;

  int cluster_count() const { return static_cast<int>(clusters.size()); }
  int size(int i) const { return static_cast<int>(clusters[i].px.size()); }
  void validate() const;
};

struct WorkingModel {
  std::vector<double> beta;  // linear mean beta . x
  CovarianceModel cov;
};

double model_mean(const WorkingModel& model, std::span<const double> x);

// Model means per person and their cluster totals.
std::vector<std::vector<double>> model_person_means(const StudyPopulation& pop,
                                                    const WorkingModel& model);
std::vector<double> model_cluster_totals(const StudyPopulation& pop,
                                         const WorkingModel& model);

// Deville-Tille balance residuals of the cluster totals against the
// balancing variables: the first-stage variance of a balanced design is
// driven by what balancing cannot explain.
struct DTResiduals {
  std::vector<double> eta;  // per cluster
  std::vector<double> phi;  // regression coefficients, one per balance column
};

DTResiduals dt_residuals(const InclusionPlan& plan,
                         std::span<const double> cluster_totals);

struct AVOptions {
  // Keep the small-sample factors M/(M-H) and N(n-1)/(n(N-1)) instead of
  // the approximations used in the closed-form write-up.
  bool exact_small_factors = false;
};

struct AVComponents {
  double eta2 = 0.0;          // first-stage balance residual part
  double srswor = 0.0;        // second-stage sampling part
  double unit_var = 0.0;      // unit-variance floor part
  double within_corr = 0.0;   // within-cluster correlation part
  double between_corr = 0.0;  // between-cluster correlation part
};

struct AVReport {
  double av_total = 0.0;
  double f_total = 0.0;            // subtracted model-variance aggregate
  AVComponents components;
  std::vector<double> sigma_i2;    // per-cluster variance contributions
  std::vector<double> eta;
  std::vector<double> phi;
};

// Anticipated variance of the two-stage HT estimator under the working
// model: joint design-and-model expectation of (est - Y)^2. joint_pi is the
// full clusters x clusters matrix of first-stage joint inclusion
// probabilities with the first-order probabilities on the diagonal.
AVReport anticipated_variance(const StudyPopulation& pop, const InclusionPlan& plan,
                              std::span<const double> joint_pi,
                              const WorkingModel& model, int n_bar,
                              const AVOptions& options = {});

// Closed-form anticipated variance of a spread ("efficient") design, where
// the correlation terms cancel and only the unit-variance floor remains.
double efficient_av(std::span<const std::int64_t> counts, double sigma_u2,
                    int m, int n_bar);

// First-stage probabilities minimizing the efficient-design anticipated
// variance under fixed expected size m; the per-cluster scale
// sigma_u/sqrt(n_bar) cancels and PPS is optimal. Throws when the no-
// truncation side condition fails, naming the offending clusters.
std::vector<double> optimal_first_stage_probs(std::span<const std::int64_t> counts,
                                              int m, double sigma_u, int n_bar);

// Two-stage Horvitz-Thompson estimate of the frame total of y.
double ht_estimate(const SampleDraw& draw, const FrameSnapshot& frame);

}  // namespace spatsurv
