#include "msstop/design.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "msstop/errors.hpp"

namespace msstop {

StudyDesign::StudyDesign(std::vector<int> occasions, int states)
    : StudyDesign(occasions, states,
                  std::vector<std::vector<bool>>(occasions.size(),
                                                 std::vector<bool>(static_cast<std::size_t>(std::max(states, 0)), true)),
                  static_cast<int>(occasions.size()), occasions) {}

StudyDesign::StudyDesign(std::vector<int> occasions, int states, std::vector<std::vector<bool>> availability,
                         int max_primary_age, std::vector<int> max_secondary_age)
    : occasions_(std::move(occasions)),
      states_(states),
      availability_(std::move(availability)),
      max_primary_age_(max_primary_age),
      max_secondary_age_(std::move(max_secondary_age)) {
  validate();
  offsets_.reserve(occasions_.size());
  for (int k : occasions_) {
    offsets_.push_back(total_occasions_);
    total_occasions_ += k;
  }
}

void StudyDesign::validate() const {
  const auto periods = occasions_.size();
  if (periods == 0) throw StructureError("design needs at least one primary period");
  if (states_ < 1) throw StructureError("design needs at least one state");
  if (states_ > 255) throw StructureError("at most 255 states are supported");
  for (int k : occasions_) {
    if (k < 1) throw StructureError("every primary period needs at least one occasion");
  }
  if (max_primary_age_ < 1 || max_primary_age_ > static_cast<int>(periods)) {
    throw StructureError("maximum primary age must lie in 1..T");
  }
  if (max_secondary_age_.size() != periods) throw StructureError("need one maximum secondary age per period");
  for (std::size_t t = 0; t < periods; ++t) {
    if (max_secondary_age_[t] < 1 || max_secondary_age_[t] > occasions_[t]) {
      throw StructureError("maximum secondary age of period " + std::to_string(t + 1) + " must lie in 1..K(t)");
    }
  }
  if (availability_.size() != periods) throw StructureError("need one availability list per period");
  for (std::size_t t = 0; t < periods; ++t) {
    if (availability_[t].size() != static_cast<std::size_t>(states_)) {
      throw StructureError("availability of period " + std::to_string(t + 1) + " must list every state");
    }
    if (std::none_of(availability_[t].begin(), availability_[t].end(), [](bool b) { return b; })) {
      throw StructureError("period " + std::to_string(t + 1) + " has no available state");
    }
  }
}

int StudyDesign::available_count(int t) const {
  const auto& row = availability_.at(static_cast<std::size_t>(t));
  return static_cast<int>(std::count(row.begin(), row.end(), true));
}

int StudyDesign::max_occasions() const noexcept { return *std::max_element(occasions_.begin(), occasions_.end()); }

int StudyDesign::max_secondary_age() const noexcept {
  return *std::max_element(max_secondary_age_.begin(), max_secondary_age_.end());
}

Dataset::Dataset(StudyDesign design, std::vector<CaptureHistory> histories, std::vector<long> counts)
    : design_(std::move(design)), histories_(std::move(histories)), counts_(std::move(counts)) {
  if (histories_.size() != counts_.size()) throw StructureError("one count per unique history is required");
  const auto length = static_cast<std::size_t>(design_.total_occasions());
  std::map<CaptureHistory, std::size_t> seen;
  for (std::size_t j = 0; j < histories_.size(); ++j) {
    const auto& h = histories_[j];
    if (h.size() != length) {
      throw StructureError("history " + std::to_string(j + 1) + " has " + std::to_string(h.size()) +
                           " entries, expected " + std::to_string(length));
    }
    if (counts_[j] < 1) throw InputError("history " + std::to_string(j + 1) + " has a count below 1");
    bool any = false;
    for (int t = 0; t < design_.periods(); ++t) {
      for (int k = 0; k < design_.occasions(t); ++k) {
        const int x = h[static_cast<std::size_t>(design_.offset(t) + k)];
        if (x == 0) continue;
        any = true;
        if (x > design_.states()) {
          throw InputError("history " + std::to_string(j + 1) + " records state " + std::to_string(x) +
                           " but G = " + std::to_string(design_.states()));
        }
        if (!design_.available(t, x - 1)) {
          throw InputError("history " + std::to_string(j + 1) + " records state " + std::to_string(x) +
                           " in period " + std::to_string(t + 1) + " where it is unavailable");
        }
      }
    }
    if (!any) throw InputError("history " + std::to_string(j + 1) + " has no capture");
    if (!seen.emplace(h, j).second) throw InputError("history " + std::to_string(j + 1) + " is a duplicate");
    observed_ += counts_[j];
  }
}

std::span<const std::uint8_t> Dataset::slice(std::size_t j, int t) const {
  return period_slice(design_, histories_.at(j), t);
}

std::span<const std::uint8_t> period_slice(const StudyDesign& design, std::span<const std::uint8_t> history, int t) {
  return history.subspan(static_cast<std::size_t>(design.offset(t)), static_cast<std::size_t>(design.occasions(t)));
}

Dataset single_period_dataset(const Dataset& data, int t) {
  const auto& d = data.design();
  StudyDesign single({d.occasions(t)}, d.states(), {d.availability()[static_cast<std::size_t>(t)]}, 1,
                     {d.max_secondary_age(t)});
  std::map<CaptureHistory, long> merged;
  for (std::size_t j = 0; j < data.unique_count(); ++j) {
    const auto s = data.slice(j, t);
    if (std::all_of(s.begin(), s.end(), [](std::uint8_t x) { return x == 0; })) continue;
    merged[CaptureHistory(s.begin(), s.end())] += data.counts()[j];
  }
  std::vector<CaptureHistory> histories;
  std::vector<long> counts;
  for (auto& [h, c] : merged) {
    histories.push_back(h);
    counts.push_back(c);
  }
  return Dataset(std::move(single), std::move(histories), std::move(counts));
}

}  // namespace msstop
