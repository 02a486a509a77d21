#include "coase/belgic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coase {

std::uint64_t stable_ceil(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<std::uint64_t>(std::max(0.0, r));
  }
  return static_cast<std::uint64_t>(std::max(0.0, std::ceil(x)));
}

std::uint64_t batch_length(const BelgicParams& params) {
  return stable_ceil(std::pow(static_cast<double>(params.horizon), params.alpha));
}

std::uint64_t batches_per_arm(const BelgicParams& params) {
  return stable_ceil(params.beta * std::log2(static_cast<double>(params.horizon)));
}

double precision(const BelgicParams& params) {
  return 1.0 / std::pow(static_cast<double>(params.horizon), params.beta);
}

std::uint64_t phase1_budget(const BelgicParams& params) {
  return params.K * batch_length(params) * batches_per_arm(params);
}

double threshold(const BelgicParams& params) {
  const auto& cert = params.certificate;
  return cert.C * std::pow(static_cast<double>(batch_length(params)),
                           cert.kappa + params.beta / params.alpha);
}

void validate_params(const BelgicParams& params) {
  const auto& cert = params.certificate;
  if (params.K == 0) throw ValidationError("K must be positive");
  if (params.horizon < 2) throw ValidationError("horizon must be at least 2");
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0,1)");
  }
  if (!(params.beta > 0.0 && params.beta < 1.0)) {
    throw ValidationError("beta must lie in (0,1)");
  }
  if (!(cert.kappa >= 0.0 && cert.kappa < 1.0)) {
    throw ValidationError("kappa must lie in [0,1)");
  }
  if (!(cert.C >= 0.0)) throw ValidationError("C must be nonnegative");
  if (!(cert.zeta > 0.0)) throw ValidationError("zeta must be positive");

  std::ostringstream msg;
  msg.precision(6);
  if (!(params.beta / params.alpha < 1.0 - cert.kappa)) {
    msg << "beta/alpha < 1 - kappa violated: " << params.beta / params.alpha
        << " >= " << 1.0 - cert.kappa;
    throw ValidationError(msg.str());
  }
  if (batches_per_arm(params) == 0) {
    throw ValidationError("ceil(log2 T^beta) must be at least 1");
  }
  const auto budget = phase1_budget(params);
  if (!(budget < params.horizon)) {
    msg << "phase-1 length K*ceil(T^alpha)*ceil(log2 T^beta) < T violated: " << budget
        << " >= " << params.horizon;
    throw ValidationError(msg.str());
  }
  const double tb = static_cast<double>(batch_length(params));
  if (!(threshold(params) < tb / 2.0)) {
    msg << "C*Tb^(kappa+beta/alpha) < Tb/2 violated: " << threshold(params) << " >= " << tb / 2.0
        << " (C=" << cert.C << ", Tb=" << tb << ")";
    throw ValidationError(msg.str());
  }
}

std::string_view to_string(BatchBranch branch) {
  switch (branch) {
    case BatchBranch::RaiseLower:
      return "raise_lower";
    case BatchBranch::LowerUpper:
      return "lower_upper";
    case BatchBranch::EarlyReturn:
      return "early_return";
  }
  return "lower_upper";
}

BatchBranch binary_search_batch_update(BinarySearchState& state, std::uint64_t mismatch_count,
                                       const BelgicParams& params) {
  const auto tb = batch_length(params);
  if (mismatch_count > tb) {
    throw ValidationError("mismatch count " + std::to_string(mismatch_count) +
                          " exceeds batch length " + std::to_string(tb));
  }
  if (state.finished) throw ValidationError("binary search on this arm already finished");

  const double theta = threshold(params);
  const double m = static_cast<double>(mismatch_count);
  const double tbd = static_cast<double>(tb);
  const double mid = state.tau_mid();
  const double eps = precision(params);

  state.mismatch_count = mismatch_count;
  state.clamped = false;
  ++state.batch_index;

  BatchBranch branch;
  if (theta < m && m < tbd - theta) {
    branch = BatchBranch::EarlyReturn;
    state.early_return = true;
    state.finished = true;
    return branch;
  }
  if (m <= tbd - theta) {
    branch = BatchBranch::LowerUpper;
    state.tau_upper = mid + eps;
  } else {
    branch = BatchBranch::RaiseLower;
    state.tau_lower = mid - eps;
  }
  const double lo = std::clamp(state.tau_lower, 0.0, 1.0);
  const double hi = std::clamp(state.tau_upper, 0.0, 1.0);
  state.clamped = lo != state.tau_lower || hi != state.tau_upper;
  state.tau_lower = lo;
  state.tau_upper = hi;
  if (state.batch_index >= batches_per_arm(params)) state.finished = true;
  return branch;
}

TransferEstimates transfer_estimates(const std::vector<BinarySearchState>& brackets,
                                     const BelgicParams& params) {
  const auto& cert = params.certificate;
  const double slack =
      precision(params) +
      cert.C * std::pow(static_cast<double>(params.horizon), (cert.kappa - 1.0) / 2.0);
  TransferEstimates est;
  est.tau_hat.resize(static_cast<Eigen::Index>(brackets.size()));
  for (std::size_t a = 0; a < brackets.size(); ++a) {
    est.tau_hat(static_cast<Eigen::Index>(a)) = brackets[a].tau_upper + slack;
  }
  return est;
}

DownstreamBanditState pair_ucb_init(std::size_t K, std::uint64_t horizon) {
  DownstreamBanditState s;
  s.K = K;
  s.horizon = horizon;
  s.counts.assign(K * K, 0);
  s.means.assign(K * K, 0.0);
  return s;
}

std::pair<Arm, Arm> bandit_alg_step(const DownstreamBanditState& state) {
  const std::size_t n_pairs = state.pairs();
  std::size_t best = 0;
  if (state.init_cursor < n_pairs) {
    best = state.init_cursor;
  } else {
    const double T = static_cast<double>(state.horizon);
    const double log_term = std::log(static_cast<double>(n_pairs) * T * T * T);
    double best_index = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < n_pairs; ++p) {
      const double idx =
          state.means[p] + 2.0 * std::sqrt(log_term / static_cast<double>(state.counts[p]));
      if (idx > best_index) {
        best_index = idx;
        best = p;
      }
    }
  }
  return {best / state.K, best % state.K};
}

void shifted_update(DownstreamBanditState& state, std::pair<Arm, Arm> played_pair,
                    Arm upstream_arm, double reward, const Vector& tau_hat) {
  const auto [offered, own] = played_pair;
  if (upstream_arm != offered) return;
  const std::size_t p = offered * state.K + own;
  const double shifted = reward - tau_hat(static_cast<Eigen::Index>(offered));
  const auto n = ++state.counts[p];
  state.means[p] = (static_cast<double>(n - 1) * state.means[p] + shifted) / static_cast<double>(n);
  ++state.samples;
  while (state.init_cursor < state.pairs() && state.counts[state.init_cursor] > 0) {
    ++state.init_cursor;
  }
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::NoProperty:
      return "no_property";
    case Phase::Phase1:
      return "phase1";
    case Phase::Phase2:
      return "phase2";
  }
  return "phase2";
}

Belgic::Belgic(BelgicParams params)
    : params_(params), batch_len_(0), bandit_(pair_ucb_init(params.K, params.horizon)) {
  validate_params(params_);
  batch_len_ = batch_length(params_);
  brackets_.resize(params_.K);
  for (Arm a = 0; a < params_.K; ++a) brackets_[a].arm = a;
}

DownstreamAction Belgic::propose(std::uint64_t round, Rng&) {
  if (round >= params_.horizon) {
    throw ValidationError("round " + std::to_string(round + 1) + " is beyond the horizon " +
                          std::to_string(params_.horizon));
  }
  if (round != round_) {
    throw ValidationError("BELGIC driven out of sequence: expected round " +
                          std::to_string(round_ + 1) + ", got " + std::to_string(round + 1));
  }
  DownstreamAction action;
  action.phase = phase_;
  if (phase_ == Phase::Phase1) {
    action.offer = IncentiveOffer{current_arm_, brackets_[current_arm_].tau_mid()};
    action.own_arm = 0;
  } else {
    const auto [offered, own] = bandit_alg_step(bandit_);
    action.offer = IncentiveOffer{offered, estimates_.tau_hat(static_cast<Eigen::Index>(offered))};
    action.own_arm = own;
  }
  return action;
}

void Belgic::observe(const DownstreamAction& action, Arm upstream_arm, double reward) {
  ++round_;
  if (action.phase == Phase::Phase2) {
    shifted_update(bandit_, {action.offer.target_arm, action.own_arm}, upstream_arm, reward,
                   estimates_.tau_hat);
    return;
  }
  if (upstream_arm != current_arm_) ++batch_mismatches_;
  if (++batch_rounds_ == batch_len_) finish_batch();
}

void Belgic::finish_batch() {
  auto& bracket = brackets_[current_arm_];
  const double mid = bracket.tau_mid();
  const auto branch = binary_search_batch_update(bracket, batch_mismatches_, params_);
  diagnostics_.push_back(BatchDiagnostic{current_arm_, bracket.batch_index, mid,
                                         batch_mismatches_, branch, bracket.tau_lower,
                                         bracket.tau_upper, bracket.clamped});
  batch_rounds_ = 0;
  batch_mismatches_ = 0;
  if (!bracket.finished) return;
  if (++current_arm_ < params_.K) return;
  estimates_ = transfer_estimates(brackets_, params_);
  phase1_length_ = round_;
  phase_ = Phase::Phase2;
}

Phase1Result run_phase1(const BanditInstance& instance, UpstreamPolicy& upstream,
                        const BelgicParams& params, Rng& rng) {
  if (params.K != instance.K) throw ValidationError("BELGIC K does not match the instance");
  Belgic belgic(params);
  for (std::uint64_t t = 0; belgic.phase() == Phase::Phase1; ++t) {
    const auto action = belgic.propose(t, rng);
    const Arm a = upstream.choose(action.offer, rng);
    upstream.observe(a, sample_upstream(instance, a, rng));
    belgic.observe(action, a, 0.0);
  }
  return Phase1Result{belgic.estimates(), belgic.brackets(), belgic.diagnostics(),
                      belgic.phase1_length()};
}

OracleDownstream::OracleDownstream(const BanditInstance& instance) {
  const auto o = compute_oracle(instance);
  action_.offer = IncentiveOffer{o.a_sw, o.tau_star(static_cast<Eigen::Index>(o.a_sw))};
  action_.own_arm = o.b_sw;
  action_.phase = Phase::Phase2;
}

DownstreamAction OracleDownstream::propose(std::uint64_t, Rng&) { return action_; }

ContextualUcb::ContextualUcb(std::size_t K)
    : K_(K),
      context_rounds_(K, 0),
      counts_(decltype(counts_)::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K))),
      means_(Matrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K))) {}

Arm ContextualUcb::choose(Arm upstream_arm, Rng&) {
  const auto ctx = static_cast<Eigen::Index>(upstream_arm);
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(K_); ++b) {
    if (counts_(ctx, b) == 0) return static_cast<Arm>(b);
  }
  const double log_n = std::log(static_cast<double>(context_rounds_[upstream_arm]));
  Arm best = 0;
  double best_index = -std::numeric_limits<double>::infinity();
  for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(K_); ++b) {
    const double idx =
        means_(ctx, b) + std::sqrt(2.0 * log_n / static_cast<double>(counts_(ctx, b)));
    if (idx > best_index) {
      best_index = idx;
      best = static_cast<Arm>(b);
    }
  }
  return best;
}

void ContextualUcb::observe(Arm upstream_arm, Arm own_arm, double reward) {
  const auto ctx = static_cast<Eigen::Index>(upstream_arm);
  const auto b = static_cast<Eigen::Index>(own_arm);
  const auto n = ++counts_(ctx, b);
  means_(ctx, b) = (static_cast<double>(n - 1) * means_(ctx, b) + reward) / static_cast<double>(n);
  ++context_rounds_[upstream_arm];
}

Arm BestResponseDownstream::choose(Arm upstream_arm, Rng&) {
  Eigen::Index b = 0;
  v_down_.row(static_cast<Eigen::Index>(upstream_arm)).maxCoeff(&b);
  return static_cast<Arm>(b);
}

std::string_view to_string(DownstreamKind kind) {
  switch (kind) {
    case DownstreamKind::Belgic:
      return "belgic";
    case DownstreamKind::Oracle:
      return "oracle";
    case DownstreamKind::ZeroTransfer:
      return "zero_transfer";
    case DownstreamKind::NaiveUcb:
      return "naive_ucb";
    case DownstreamKind::BestResponse:
      return "best_response";
  }
  return "belgic";
}

DownstreamKind downstream_kind_from_string(std::string_view name) {
  if (name == "belgic") return DownstreamKind::Belgic;
  if (name == "oracle") return DownstreamKind::Oracle;
  if (name == "zero_transfer") return DownstreamKind::ZeroTransfer;
  if (name == "naive_ucb") return DownstreamKind::NaiveUcb;
  if (name == "best_response") return DownstreamKind::BestResponse;
  throw ValidationError("unknown downstream policy '" + std::string(name) +
                        "' (expected belgic, oracle, zero_transfer, naive_ucb or best_response)");
}

bool is_property_kind(DownstreamKind kind) {
  return kind == DownstreamKind::Belgic || kind == DownstreamKind::Oracle ||
         kind == DownstreamKind::ZeroTransfer;
}

}  // namespace coase
