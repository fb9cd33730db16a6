#include "spatsurv/estimation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace spatsurv {

void CovarianceModel::validate() const {
  if (!(sigma_u2 >= 0.0))
    throw std::invalid_argument("covariance: sigma_u2 must be non-negative");
  if (kind == CovarianceKind::power) {
    if (!(rho_base >= 0.0 && rho_base < 1.0))
      throw std::invalid_argument("covariance: rho_base must lie in [0, 1)");
  } else {
    if (!(alpha > 0.0))
      throw std::invalid_argument("covariance: alpha must be positive");
    if (!(tau2 >= 0.0))
      throw std::invalid_argument("covariance: tau2 must be non-negative");
  }
}

double correlation_at(const CovarianceModel& model, double d) {
  if (!(d >= 0.0)) throw std::invalid_argument("correlation_at: negative distance");
  if (model.kind == CovarianceKind::power) {
    return d == 0.0 ? 1.0 : std::pow(model.rho_base, d);
  }
  const double r = d / model.alpha;
  return std::exp(-3.0 * r * r) + model.tau2;
}

void StudyPopulation::validate() const {
  if (x_dim < 1) throw std::invalid_argument("population: x_dim must be at least 1");
  if (clusters.empty()) throw std::invalid_argument("population: no clusters");
  for (const StudyCluster& c : clusters) {
    const std::size_t n = c.px.size();
    if (c.py.size() != n || c.x.size() != n * static_cast<std::size_t>(x_dim))
      throw std::invalid_argument("population: person array shape mismatch");
  }
}

double model_mean(const WorkingModel& model, std::span<const double> x) {
  if (model.beta.size() != x.size())
    throw std::invalid_argument("model_mean: beta/x dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += model.beta[k] * x[k];
  return s;
}

std::vector<std::vector<double>> model_person_means(const StudyPopulation& pop,
                                                    const WorkingModel& model) {
  pop.validate();
  std::vector<std::vector<double>> means(pop.cluster_count());
  for (int i = 0; i < pop.cluster_count(); ++i) {
    const StudyCluster& c = pop.clusters[i];
    const int n = pop.size(i);
    means[i].resize(n);
    for (int j = 0; j < n; ++j) {
      means[i][j] = model_mean(
          model, std::span<const double>(c.x.data() + static_cast<std::size_t>(j) * pop.x_dim,
                                         pop.x_dim));
    }
  }
  return means;
}

std::vector<double> model_cluster_totals(const StudyPopulation& pop,
                                         const WorkingModel& model) {
  const auto means = model_person_means(pop, model);
  std::vector<double> totals(means.size(), 0.0);
  for (std::size_t i = 0; i < means.size(); ++i)
    for (double v : means[i]) totals[i] += v;
  return totals;
}

DTResiduals dt_residuals(const InclusionPlan& plan,
                         std::span<const double> cluster_totals) {
  const int m = plan.clusters();
  const int h = plan.balance_cols;
  if (static_cast<int>(cluster_totals.size()) != m)
    throw std::invalid_argument("dt_residuals: totals size mismatch");

  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(h, h);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h);
  for (int i = 0; i < m; ++i) {
    const double pi = plan.pi[i];
    const double w = pi * (1.0 - pi);
    for (int a = 0; a < h; ++a) {
      const double da = plan.balance_at(i, a);
      rhs(a) += (1.0 - pi) * da * cluster_totals[i];
      for (int b = 0; b < h; ++b) delta(a, b) += w * da * plan.balance_at(i, b);
    }
  }

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(delta);
  cod.setThreshold(1e-12);
  if (cod.rank() == 0)
    throw std::invalid_argument(
        "dt_residuals: Delta matrix is singular (no first-stage randomness)");
  if (cod.rank() < h)
    std::cerr << "spatsurv: Delta matrix rank-deficient, using minimum-norm fit\n";
  const Eigen::VectorXd phi = cod.solve(rhs);

  DTResiduals out;
  out.phi.assign(phi.data(), phi.data() + h);
  out.eta.resize(m);
  for (int i = 0; i < m; ++i) {
    double fit = 0.0;
    for (int a = 0; a < h; ++a) fit += plan.balance_at(i, a) * phi(a);
    out.eta[i] = cluster_totals[i] - plan.pi[i] * fit;
  }
  return out;
}

AVReport anticipated_variance(const StudyPopulation& pop, const InclusionPlan& plan,
                              std::span<const double> joint_pi,
                              const WorkingModel& model, int n_bar,
                              const AVOptions& options) {
  pop.validate();
  model.cov.validate();
  const int m = pop.cluster_count();
  if (plan.clusters() != m)
    throw std::invalid_argument("anticipated_variance: plan/population size mismatch");
  if (joint_pi.size() != static_cast<std::size_t>(m) * m)
    throw std::invalid_argument("anticipated_variance: joint_pi must be clusters^2");
  if (n_bar < 1) throw std::invalid_argument("anticipated_variance: n_bar must be at least 1");
  for (int i = 0; i < m; ++i) {
    if (std::abs(joint_pi[static_cast<std::size_t>(i) * m + i] - plan.pi[i]) > 1e-6)
      throw std::invalid_argument(
          "anticipated_variance: joint_pi diagonal must match the plan probabilities");
    for (int l = i + 1; l < m; ++l) {
      if (std::abs(joint_pi[static_cast<std::size_t>(i) * m + l] -
                   joint_pi[static_cast<std::size_t>(l) * m + i]) > 1e-6)
        throw std::invalid_argument("anticipated_variance: joint_pi must be symmetric");
    }
  }

  const double sigma_u2 = model.cov.sigma_u2;
  const auto means = model_person_means(pop, model);
  std::vector<double> totals(m, 0.0);
  for (int i = 0; i < m; ++i)
    for (double v : means[i]) totals[i] += v;

  const DTResiduals dt = dt_residuals(plan, totals);

  // Within-cluster model variance of the means and pure-correlation sums.
  std::vector<double> var_mean(m, 0.0);   // sigma^2_{ytilde,i}
  std::vector<double> corr_within(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const StudyCluster& c = pop.clusters[i];
    const int n = pop.size(i);
    if (n > 1) {
      const double mean = totals[i] / n;
      double ss = 0.0;
      for (double v : means[i]) ss += (v - mean) * (v - mean);
      var_mean[i] = ss / (n - 1);
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          const double dx = c.px[j] - c.px[k];
          const double dy = c.py[j] - c.py[k];
          s += correlation_at(model.cov, std::sqrt(dx * dx + dy * dy));
        }
      }
      corr_within[i] = 2.0 * s;  // ordered pairs
    }
  }

  AVReport rep;
  rep.eta = dt.eta;
  rep.phi = dt.phi;
  rep.sigma_i2.assign(m, 0.0);

  const double m_over_mh =
      options.exact_small_factors && m > plan.balance_cols
          ? static_cast<double>(m) / static_cast<double>(m - plan.balance_cols)
          : 1.0;

  AVComponents comp;
  double f_total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double pi = plan.pi[i];
    const double n_i = static_cast<double>(pop.size(i));
    const double n_s = std::min<double>(n_bar, n_i);  // actual take
    const double eta2 = dt.eta[i] * dt.eta[i];
    if (pi <= 0.0) {
      // Never-selected cluster: infinite design variance unless it carries
      // no variability at all. Reject clean rather than divide by zero.
      throw std::invalid_argument("anticipated_variance: zero inclusion probability");
    }

    const double within_factor =
        options.exact_small_factors
            ? (n_i > 1.0 ? n_i * (n_s - 1.0) / (n_s * (n_i - 1.0)) : 0.0)
            : 1.0;

    comp.eta2 += m_over_mh * (1.0 / pi - 1.0) * eta2;
    comp.srswor += (1.0 / pi) * var_mean[i] * n_i * (n_i - n_s) / n_s;
    // The census side of the unit-variance term is V_M(Y)'s diagonal, one
    // sigma_u^2 per person: N_i * sigma_u^2 (a census with n_s = N_i and
    // pi = 1 must zero this component).
    comp.unit_var += (1.0 / pi) * n_i * n_i * sigma_u2 / n_s - n_i * sigma_u2;
    comp.within_corr +=
        (1.0 / pi) * sigma_u2 * corr_within[i] * within_factor - sigma_u2 * corr_within[i];

    // Eq-13-style per-cluster contribution (printed small-sample form).
    rep.sigma_i2[i] = eta2 + var_mean[i] * n_i * (n_i - n_s) / n_s +
                      n_i * n_i * sigma_u2 / n_s + sigma_u2 * corr_within[i];
    f_total += eta2 + n_i * sigma_u2 + sigma_u2 * corr_within[i];
  }

  // Between-cluster part, driven by how the design pairs clusters compared
  // with independent selection.
  for (int i = 0; i < m; ++i) {
    const StudyCluster& ci = pop.clusters[i];
    for (int l = i + 1; l < m; ++l) {
      const StudyCluster& cl = pop.clusters[l];
      double corr = 0.0;
      for (std::size_t j = 0; j < ci.px.size(); ++j) {
        for (std::size_t k = 0; k < cl.px.size(); ++k) {
          const double dx = ci.px[j] - cl.px[k];
          const double dy = ci.py[j] - cl.py[k];
          corr += correlation_at(model.cov, std::sqrt(dx * dx + dy * dy));
        }
      }
      const double pij = joint_pi[static_cast<std::size_t>(i) * m + l];
      const double both = pij / (plan.pi[i] * plan.pi[l]);
      comp.between_corr += 2.0 * (both - 1.0) * sigma_u2 * corr;
      rep.sigma_i2[i] += (pij / plan.pi[l]) * sigma_u2 * corr;
      rep.sigma_i2[l] += (pij / plan.pi[i]) * sigma_u2 * corr;
      f_total += 2.0 * sigma_u2 * corr;
    }
  }

  rep.components = comp;
  rep.f_total = f_total;
  rep.av_total = comp.eta2 + comp.srswor + comp.unit_var + comp.within_corr +
                 comp.between_corr;
  return rep;
}

double efficient_av(std::span<const std::int64_t> counts, double sigma_u2,
                    int m, int n_bar) {
  if (!(sigma_u2 >= 0.0))
    throw std::invalid_argument("efficient_av: sigma_u2 must be non-negative");
  if (n_bar < 1) throw std::invalid_argument("efficient_av: n_bar must be at least 1");
  const std::vector<double> pi = pps_probabilities(counts, m);
  double av = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    const double n_i = static_cast<double>(counts[i]);
    const double n_s = std::min<double>(n_bar, n_i);
    // Same census diagonal as the full assembly: a cluster census with
    // pi = 1, n_bar = N_i must contribute zero.
    av += (1.0 / pi[i]) * n_i * n_i * sigma_u2 / n_s - n_i * sigma_u2;
  }
  return av;
}

std::vector<double> optimal_first_stage_probs(std::span<const std::int64_t> counts,
                                              int m, double sigma_u, int n_bar) {
  if (!(sigma_u >= 0.0))
    throw std::invalid_argument("optimal_first_stage_probs: sigma_u must be non-negative");
  if (n_bar < 1)
    throw std::invalid_argument("optimal_first_stage_probs: n_bar must be at least 1");
  if (m < 1) throw std::invalid_argument("optimal_first_stage_probs: m must be at least 1");

  // The per-cluster scale sigma_u/sqrt(n_bar) multiplies every weight and
  // cancels in the normalization; carried through anyway so the formula
  // reads like the optimality condition.
  const double scale = sigma_u > 0.0 ? sigma_u / std::sqrt(static_cast<double>(n_bar)) : 1.0;
  double total = 0.0;
  for (std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("optimal_first_stage_probs: negative count");
    total += static_cast<double>(c) * scale;
  }
  if (total <= 0.0)
    throw std::invalid_argument("optimal_first_stage_probs: all clusters empty");

  std::string violators;
  std::vector<double> pi(counts.size(), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double w = static_cast<double>(counts[i]) * scale;
    pi[i] = m * w / total;
    if (pi[i] > 1.0) {
      if (!violators.empty()) violators += ", ";
      violators += std::to_string(i);
    }
  }
  if (!violators.empty())
    throw std::invalid_argument(
        "optimal_first_stage_probs: no-truncation condition violated by clusters " +
        violators);
  return pi;
}

double ht_estimate(const SampleDraw& draw, const FrameSnapshot& frame) {
  double total = 0.0;
  for (std::size_t c = 0; c < draw.clusters.size(); ++c) {
    const CellFrame& cell = frame.cells[draw.clusters[c]];
    double cluster_sum = 0.0;
    for (int p : draw.persons[c]) cluster_sum += cell.y[p];
    total += draw.w_first[c] * cluster_sum * draw.w_second[c];
  }
  return total;
}

}  // namespace spatsurv
