#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gpkmd {

/// Observed multivariate time series y_0..y_N, stored task-major:
/// values() is M x (N+1), column k holding snapshot y_k.
class SnapshotSequence {
 public:
  /// Throws DomainError on empty/non-finite values or sample_period <= 0.
  /// Missing labels default to "y1".."yM".
  SnapshotSequence(Eigen::MatrixXd values, double sample_period,
                   std::vector<std::string> labels = {});

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double sample_period() const noexcept { return sample_period_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  Eigen::Index tasks() const noexcept { return values_.rows(); }
  /// N, the index of the last snapshot.
  Eigen::Index last_index() const noexcept { return values_.cols() - 1; }
  Eigen::Index snapshot_count() const noexcept { return values_.cols(); }

  Eigen::VectorXd snapshot(Eigen::Index k) const { return values_.col(k); }

 private:
  Eigen::MatrixXd values_;
  double sample_period_;
  std::vector<std::string> labels_;
};

/// Delay-embedded GP training pairs (z_k, y_k), k = p..N.
class TrainingSet {
 public:
  /// Assembles a training set from explicit pairs. `inputs` is (M*p) x n,
  /// `outputs` is M x n. Scales must be strictly positive.
  TrainingSet(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs, int embedding_order,
              Eigen::VectorXd input_scales, Eigen::VectorXd output_scales,
              double sample_period,
              std::optional<Eigen::VectorXd> next_input = std::nullopt);

  /// Column j is z_{p+j}.
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  /// Column j is y_{p+j}.
  const Eigen::MatrixXd& outputs() const noexcept { return outputs_; }
  int embedding_order() const noexcept { return order_; }
  const Eigen::VectorXd& input_scales() const noexcept { return input_scales_; }
  const Eigen::VectorXd& output_scales() const noexcept { return output_scales_; }
  double sample_period() const noexcept { return sample_period_; }

  /// z_{N+1} = [y_{N-p+1}; ...; y_N], present when built from a sequence.
  const std::optional<Eigen::VectorXd>& next_input() const noexcept { return next_input_; }

  Eigen::Index size() const noexcept { return outputs_.cols(); }
  Eigen::Index tasks() const noexcept { return outputs_.rows(); }
  Eigen::Index input_dimension() const noexcept { return inputs_.rows(); }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd outputs_;
  int order_;
  Eigen::VectorXd input_scales_;
  Eigen::VectorXd output_scales_;
  double sample_period_;
  std::optional<Eigen::VectorXd> next_input_;
};

/// Default delay-embedding order.
inline constexpr int kDefaultEmbeddingOrder = 15;

/// Reads a time-major CSV table (rows = snapshots, columns = tasks).
SnapshotSequence load_timeseries(std::string_view csv_text, double sample_period);
SnapshotSequence load_timeseries(std::istream& in, double sample_period);

/// Builds the N-p+1 pairs z_k = [y_{k-p}; ...; y_{k-1}] -> y_k.
///
/// Scales: s_i = max_k |[z_k]_i| over the training inputs, ss_i = max over
/// all snapshots of |[y_k]_i|; a zero maximum (constant-zero channel) is
/// replaced by 1.
TrainingSet build_training_set(const SnapshotSequence& seq, int embedding_order);

/// Component-wise z_i / s_i.
Eigen::VectorXd scaled_input(const Eigen::Ref<const Eigen::VectorXd>& z,
                             const Eigen::Ref<const Eigen::VectorXd>& scales);

/// Stacks p consecutive snapshots ending just before `end` (exclusive).
Eigen::VectorXd delay_vector(const SnapshotSequence& seq, Eigen::Index end, int embedding_order);

}  // namespace gpkmd
