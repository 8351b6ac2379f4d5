#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advattr/noise_gen.hpp"
#include "advattr/world.hpp"

namespace advattr {

/// Everything the gain function needs for one source-target pair. The gain
/// of a subset S is -L_adv of synthesize(code + sum_{i in S} v_i) against
/// the target, averaged over `models`.
struct GainContext {
  const World& world;
  std::span<const double> source_code;
  std::span<const double> target;
  std::span<const VicinityVector> vicinity;
  std::span<const Embedder* const> models;
};

double set_gain(const GainContext& ctx, std::span<const std::size_t> subset);

/// F(all) - F(all without i).
double marginal_gain(std::size_t attribute, const GainContext& ctx);

/// Marginal gain of every attribute, sharing the F(all) evaluation.
std::vector<double> marginal_gains(const GainContext& ctx);

/// Index of the largest gain; ties go to the lowest index.
std::size_t select_attribute(std::span<const double> gains);

struct GainRecord {
  std::size_t iteration = 0;
  std::vector<double> gains;
  std::size_t selected = 0;
};

class SelectionLog {
 public:
  explicit SelectionLog(std::size_t num_attributes = 0) : counts_(num_attributes, 0) {}

  void record(GainRecord rec);
  const std::vector<GainRecord>& records() const { return records_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t num_attributes() const { return counts_.size(); }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<GainRecord> records_;
  std::vector<std::size_t> counts_;
};

struct FrequencyHistogram {
  std::vector<std::size_t> counts;
  std::vector<double> fractions;
};

FrequencyHistogram frequency_histogram(const SelectionLog& log);
FrequencyHistogram frequency_histogram(std::span<const std::size_t> selections,
                                       std::size_t num_attributes);

}  // namespace advattr
