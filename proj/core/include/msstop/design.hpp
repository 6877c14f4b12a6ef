#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace msstop {

/// Shape of a multi-period study.
///
/// Periods, occasions, states and ages are 1-based in the model but every
/// accessor here takes 0-based indices: period `t` in [0, T), occasion `k` in
/// [0, K(t)), state `g` in [0, G), age `a` in [0, a'(t)).
class StudyDesign {
 public:
  /// All states available in every period, A' = T and a'(t) = K(t).
  StudyDesign(std::vector<int> occasions, int states);

  /// `availability[t][g]` marks state g+1 as observable in period t+1.
  StudyDesign(std::vector<int> occasions, int states, std::vector<std::vector<bool>> availability,
              int max_primary_age, std::vector<int> max_secondary_age);

  int periods() const noexcept { return static_cast<int>(occasions_.size()); }
  int occasions(int t) const { return occasions_.at(static_cast<std::size_t>(t)); }
  const std::vector<int>& occasions() const noexcept { return occasions_; }
  int states() const noexcept { return states_; }
  int max_primary_age() const noexcept { return max_primary_age_; }
  int max_secondary_age(int t) const { return max_secondary_age_.at(static_cast<std::size_t>(t)); }
  const std::vector<int>& max_secondary_ages() const noexcept { return max_secondary_age_; }

  bool available(int t, int g) const {
    return availability_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(g));
  }
  const std::vector<std::vector<bool>>& availability() const noexcept { return availability_; }
  int available_count(int t) const;

  /// Total number of secondary occasions, the length of a capture history.
  int total_occasions() const noexcept { return total_occasions_; }
  /// Index of the first occasion of period t within a flat history.
  int offset(int t) const { return offsets_.at(static_cast<std::size_t>(t)); }
  int max_occasions() const noexcept;
  int max_secondary_age() const noexcept;

  /// Hidden states of the within-period chain: not-arrived, a'(t)*G age/state cells, departed.
  int secondary_state_count(int t) const { return max_secondary_age(t) * states_ + 2; }
  /// Hidden states of the between-period chain: not-recruited, ages 1..A', departed.
  int primary_state_count() const noexcept { return max_primary_age_ + 2; }

  friend bool operator==(const StudyDesign&, const StudyDesign&) = default;

 private:
  void validate() const;

  std::vector<int> occasions_;
  int states_ = 1;
  std::vector<std::vector<bool>> availability_;
  int max_primary_age_ = 1;
  std::vector<int> max_secondary_age_;
  std::vector<int> offsets_;
  int total_occasions_ = 0;
};

/// One capture history: entry 0 means not captured, g >= 1 means captured in state g.
using CaptureHistory = std::vector<std::uint8_t>;

/// Unique capture histories with multiplicities.
class Dataset {
 public:
  Dataset(StudyDesign design, std::vector<CaptureHistory> histories, std::vector<long> counts);

  const StudyDesign& design() const noexcept { return design_; }
  const std::vector<CaptureHistory>& histories() const noexcept { return histories_; }
  const std::vector<long>& counts() const noexcept { return counts_; }
  std::size_t unique_count() const noexcept { return histories_.size(); }
  /// Number of observed individuals.
  long observed() const noexcept { return observed_; }

  /// Occasions of period t within history j.
  std::span<const std::uint8_t> slice(std::size_t j, int t) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  StudyDesign design_;
  std::vector<CaptureHistory> histories_;
  std::vector<long> counts_;
  long observed_ = 0;
};

/// The history restricted to period t.
std::span<const std::uint8_t> period_slice(const StudyDesign& design, std::span<const std::uint8_t> history,
                                           int t);

/// Dataset of the period-t occasions only, as a one-period study (histories
/// with no capture in t dropped, duplicates merged).
Dataset single_period_dataset(const Dataset& data, int t);

}  // namespace msstop
