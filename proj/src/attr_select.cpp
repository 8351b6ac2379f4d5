#include "advattr/attr_select.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "advattr/losses.hpp"

namespace advattr {

namespace {

double gain_of_code(const GainContext& ctx, const Vec& code) {
  if (ctx.models.empty()) throw std::invalid_argument("gain needs at least one embedder");
  const ImageVector face = synthesize(ctx.world.generator, code);
  double loss = 0.0;
  for (const Embedder* m : ctx.models) loss += adv_loss(face, ctx.target, *m);
  return -loss / static_cast<double>(ctx.models.size());
}

void check_context(const GainContext& ctx) {
  if (ctx.vicinity.size() != ctx.world.attributes.size()) {
    throw ShapeError("gain context needs one vicinity vector per attribute");
  }
  for (const auto& v : ctx.vicinity) {
    if (v.size() != ctx.source_code.size()) throw ShapeError("vicinity dimension mismatch");
  }
}

// code + sum of v_i over every attribute except `skip` (npos = none skipped)
Vec edited_code(const GainContext& ctx, std::size_t skip) {
  Vec code(ctx.source_code.begin(), ctx.source_code.end());
  for (std::size_t i = 0; i < ctx.vicinity.size(); ++i) {
    if (i == skip) continue;
    for (std::size_t k = 0; k < code.size(); ++k) code[k] += ctx.vicinity[i][k];
  }
  return code;
}

}  // namespace

double set_gain(const GainContext& ctx, std::span<const std::size_t> subset) {
  check_context(ctx);
  std::vector<bool> seen(ctx.vicinity.size(), false);
  Vec code(ctx.source_code.begin(), ctx.source_code.end());
  for (std::size_t i : subset) {
    if (i >= ctx.vicinity.size()) {
      throw std::out_of_range("attribute index " + std::to_string(i) + " out of range");
    }
    if (seen[i]) throw std::invalid_argument("duplicate attribute index in subset");
    seen[i] = true;
    for (std::size_t k = 0; k < code.size(); ++k) code[k] += ctx.vicinity[i][k];
  }
  return gain_of_code(ctx, code);
}

double marginal_gain(std::size_t attribute, const GainContext& ctx) {
  check_context(ctx);
  if (attribute >= ctx.vicinity.size()) {
    throw std::out_of_range("attribute index " + std::to_string(attribute) + " out of range");
  }
  const double full = gain_of_code(ctx, edited_code(ctx, static_cast<std::size_t>(-1)));
  return full - gain_of_code(ctx, edited_code(ctx, attribute));
}

std::vector<double> marginal_gains(const GainContext& ctx) {
  check_context(ctx);
  const double full = gain_of_code(ctx, edited_code(ctx, static_cast<std::size_t>(-1)));
  std::vector<double> gains(ctx.vicinity.size());
  for (std::size_t i = 0; i < gains.size(); ++i) {
    gains[i] = full - gain_of_code(ctx, edited_code(ctx, i));
  }
  return gains;
}

std::size_t select_attribute(std::span<const double> gains) {
  if (gains.empty()) throw std::invalid_argument("select_attribute: empty gain list");
  std::size_t best = 0;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (!std::isfinite(gains[i])) throw NumericError("select_attribute: non-finite gain");
    if (gains[i] > gains[best]) best = i;
  }
  return best;
}

void SelectionLog::record(GainRecord rec) {
  if (rec.selected >= counts_.size()) {
    throw std::out_of_range("selected attribute " + std::to_string(rec.selected) +
                            " out of range");
  }
  ++counts_[rec.selected];
  records_.push_back(std::move(rec));
}

FrequencyHistogram frequency_histogram(std::span<const std::size_t> selections,
                                       std::size_t num_attributes) {
  if (selections.empty()) throw std::invalid_argument("frequency_histogram: empty log");
  FrequencyHistogram h;
  h.counts.assign(num_attributes, 0);
  for (std::size_t s : selections) {
    if (s >= num_attributes) throw std::out_of_range("selection index out of range");
    ++h.counts[s];
  }
  const double total = static_cast<double>(selections.size());
  for (std::size_t c : h.counts) h.fractions.push_back(static_cast<double>(c) / total);
  return h;
}

FrequencyHistogram frequency_histogram(const SelectionLog& log) {
  std::vector<std::size_t> selections;
  selections.reserve(log.records().size());
  for (const auto& r : log.records()) selections.push_back(r.selected);
  return frequency_histogram(selections, log.num_attributes());
}

}  // namespace advattr
