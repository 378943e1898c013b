#include "gpkmd/embedding.hpp"

#include <cmath>
#include <iterator>
#include <sstream>

#include "gpkmd/csv.hpp"
#include "gpkmd/error.hpp"

namespace gpkmd {

SnapshotSequence::SnapshotSequence(Eigen::MatrixXd values, double sample_period,
                                   std::vector<std::string> labels)
    : values_(std::move(values)), sample_period_(sample_period), labels_(std::move(labels)) {
  if (values_.rows() < 1 || values_.cols() < 2) {
    throw DomainError("snapshot sequence needs at least one task and two snapshots");
  }
  if (!values_.allFinite()) throw DomainError("snapshot sequence contains non-finite values");
  if (!(sample_period_ > 0.0) || !std::isfinite(sample_period_)) {
    throw DomainError("sample period must be positive and finite");
  }
  if (!labels_.empty() && static_cast<Eigen::Index>(labels_.size()) != values_.rows()) {
    throw DomainError("label count does not match task count");
  }
  if (labels_.empty()) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) labels_.push_back("y" + std::to_string(i + 1));
  }
}

TrainingSet::TrainingSet(Eigen::MatrixXd inputs, Eigen::MatrixXd outputs, int embedding_order,
                         Eigen::VectorXd input_scales, Eigen::VectorXd output_scales,
                         double sample_period, std::optional<Eigen::VectorXd> next_input)
    : inputs_(std::move(inputs)),
      outputs_(std::move(outputs)),
      order_(embedding_order),
      input_scales_(std::move(input_scales)),
      output_scales_(std::move(output_scales)),
      sample_period_(sample_period),
      next_input_(std::move(next_input)) {
  if (order_ < 1) throw DomainError("embedding order must be positive");
  if (outputs_.cols() < 1 || outputs_.rows() < 1) throw DomainError("training set is empty");
  if (inputs_.cols() != outputs_.cols()) {
    throw DomainError("input and output counts differ");
  }
  if (input_scales_.size() != inputs_.rows() || output_scales_.size() != outputs_.rows()) {
    throw DomainError("scale vector dimensions do not match the data");
  }
  if ((input_scales_.array() <= 0.0).any() || (output_scales_.array() <= 0.0).any()) {
    throw DomainError("scales must be strictly positive");
  }
  if (next_input_ && next_input_->size() != inputs_.rows()) {
    throw DomainError("next input has the wrong dimension");
  }
  if (!(sample_period_ > 0.0)) throw DomainError("sample period must be positive");
}

SnapshotSequence load_timeseries(std::string_view csv_text, double sample_period) {
  const auto table = csv::parse_numeric(csv_text);
  if (table.rows.size() < 2) {
    throw InsufficientDataError("time series needs at least 2 rows, got " +
                                std::to_string(table.rows.size()));
  }
  const auto snapshots = static_cast<Eigen::Index>(table.rows.size());
  const auto tasks = static_cast<Eigen::Index>(table.rows.front().size());
  Eigen::MatrixXd values(tasks, snapshots);
  for (Eigen::Index k = 0; k < snapshots; ++k) {
    for (Eigen::Index i = 0; i < tasks; ++i) values(i, k) = table.rows[k][i];
  }
  return SnapshotSequence(std::move(values), sample_period, table.header);
}

SnapshotSequence load_timeseries(std::istream& in, double sample_period) {
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return load_timeseries(std::string_view(text), sample_period);
}

Eigen::VectorXd delay_vector(const SnapshotSequence& seq, Eigen::Index end, int embedding_order) {
  const auto m = seq.tasks();
  Eigen::VectorXd z(m * embedding_order);
  for (int lag = 0; lag < embedding_order; ++lag) {
    z.segment(lag * m, m) = seq.values().col(end - embedding_order + lag);
  }
  return z;
}

TrainingSet build_training_set(const SnapshotSequence& seq, int embedding_order) {
  if (embedding_order <= 0) throw DomainError("embedding order must be positive");
  const auto n_last = seq.last_index();
  if (embedding_order >= n_last) {
    throw InsufficientDataError("embedding order p=" + std::to_string(embedding_order) +
                                " needs p <= N-1 with N=" + std::to_string(n_last) +
                                "; use a smaller p or a longer series");
  }
  const auto m = seq.tasks();
  const auto count = n_last - embedding_order + 1;

  Eigen::MatrixXd inputs(m * embedding_order, count);
  Eigen::MatrixXd outputs(m, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const auto k = embedding_order + j;
    inputs.col(j) = delay_vector(seq, k, embedding_order);
    outputs.col(j) = seq.values().col(k);
  }

  Eigen::VectorXd input_scales = inputs.cwiseAbs().rowwise().maxCoeff();
  Eigen::VectorXd output_scales = seq.values().cwiseAbs().rowwise().maxCoeff();
  input_scales = (input_scales.array() == 0.0).select(1.0, input_scales);
  output_scales = (output_scales.array() == 0.0).select(1.0, output_scales);

  return TrainingSet(std::move(inputs), std::move(outputs), embedding_order,
                     std::move(input_scales), std::move(output_scales), seq.sample_period(),
                     delay_vector(seq, n_last + 1, embedding_order));
}

Eigen::VectorXd scaled_input(const Eigen::Ref<const Eigen::VectorXd>& z,
                             const Eigen::Ref<const Eigen::VectorXd>& scales) {
  if (z.size() != scales.size()) {
    throw DomainError("scaled_input: dimension mismatch (" + std::to_string(z.size()) + " vs " +
                      std::to_string(scales.size()) + ")");
  }
  return z.cwiseQuotient(scales);
}

}  // namespace gpkmd
