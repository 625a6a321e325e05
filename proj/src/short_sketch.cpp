#include "sspd/short_sketch.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <thread>

#include "sspd/detail/lp_bits.hpp"
#include "sspd/error.hpp"

namespace sspd {

unsigned tau_from_theta(std::uint64_t theta, unsigned g) {
  if (theta == 0) fail(ErrorCode::invalid_argument, "theta must be >= 1");
  if (g == 0) fail(ErrorCode::invalid_argument, "register width g must be >= 1");
  unsigned tau = 0;
  while ((std::uint64_t{g} << tau) < theta) ++tau;
  return tau;
}

ShortEstimator::ShortEstimator(unsigned width, std::uint64_t bits) : bits_(bits), width_(width) {
  if (width == 0 || width > 64) {
    fail(ErrorCode::invalid_argument, "short register width must be in [1, 64]");
  }
  bits_ &= detail::low_mask(width);
}

unsigned ShortEstimator::weight() const noexcept {
  return static_cast<unsigned>(std::popcount(bits_));
}

void ShortEstimator::set(unsigned bit) {
  if (bit >= width_) fail(ErrorCode::invalid_argument, "bit outside short register");
  bits_ |= std::uint64_t{1} << bit;
}

namespace {
void require_same_width(const ShortEstimator& x, const ShortEstimator& y) {
  if (x.width() != y.width()) {
    fail(ErrorCode::invalid_argument, "short register width mismatch: " +
                                          std::to_string(x.width()) + " vs " +
                                          std::to_string(y.width()));
  }
}
}  // namespace

ShortEstimator se_and(const ShortEstimator& x, const ShortEstimator& y) {
  require_same_width(x, y);
  return ShortEstimator(x.width(), x.bits() & y.bits());
}

ShortEstimator se_or(const ShortEstimator& x, const ShortEstimator& y) {
  require_same_width(x, y);
  return ShortEstimator(x.width(), x.bits() | y.bits());
}

ShortEstimator se_update(ShortEstimator se, std::uint32_t oip, unsigned tau,
                         const SeedSet& seeds) {
  if (lsb(hash_full(oip, seeds.sample)) < tau) return se;
  se.set(hash_range_unchecked(oip, seeds.slot, se.width()));
  return se;
}

std::size_t SeavConfig::registers_per_array() const noexcept {
  std::size_t n = 0;
  for (auto w : row_width) n += w;
  return n;
}

namespace {

std::uint64_t row_span_mask(const SeavConfig& c, unsigned row) {
  return detail::deposit_wrapped(static_cast<std::uint32_t>(detail::low_mask(c.index_bits[row])),
                                 c.index_start[row], c.lp_bits());
}

[[noreturn]] void config_error(const std::string& what) {
  fail(ErrorCode::config_invalid, what);
}

}  // namespace

void validate_seav_config(const SeavConfig& c) {
  if (c.address_bits == 0 || c.address_bits > 32) config_error("address_bits must be in [1, 32]");
  if (c.r > 16) config_error("r must be <= 16");
  if (c.r >= c.address_bits) config_error("r must leave at least one LP bit");
  if (c.rows < 2) config_error("rows must be >= 2: a row needs an overlap partner");
  if (c.rows > kMaxRows) config_error("rows must be <= " + std::to_string(kMaxRows));
  if (c.overlap < 1) config_error("overlap a must be >= 1");
  if (c.g < ShortEstimator::kHotWeight || c.g > 64) config_error("g must be in [3, 64]");
  if (c.theta == 0) config_error("theta must be >= 1");
  if (c.tau != tau_from_theta(c.theta, c.g)) config_error("tau does not match theta and g");
  if (c.index_start.size() != c.rows || c.index_bits.size() != c.rows ||
      c.row_width.size() != c.rows) {
    config_error("row layout arrays must have one entry per row");
  }
  const unsigned lp = c.lp_bits();
  for (unsigned i = 0; i < c.rows; ++i) {
    if (c.index_start[i] >= lp) config_error("row " + std::to_string(i) + " starts past the LP");
    if (c.index_bits[i] == 0 || c.index_bits[i] > lp) {
      config_error("row " + std::to_string(i) + " index span must be in [1, LP width]");
    }
    if (c.index_bits[i] > kMaxIndexBits) {
      config_error("row " + std::to_string(i) + " index span exceeds " +
                   std::to_string(kMaxIndexBits) + " bits");
    }
    if (c.row_width[i] != (std::uint32_t{1} << c.index_bits[i])) {
      config_error("row width must be 2^index_bits");
    }
  }

  std::uint64_t covered = 0;
  for (unsigned i = 0; i < c.rows; ++i) covered |= row_span_mask(c, i);
  if (covered != detail::low_mask(lp)) {
    config_error("constraint 1 violated: some LP bit is in no row index");
  }
  for (unsigned i = 0; i < c.rows; ++i) {
    const unsigned next = (i + 1) % c.rows;
    const auto shared = std::popcount(row_span_mask(c, i) & row_span_mask(c, next));
    if (static_cast<unsigned>(shared) < c.overlap) {
      config_error("constraint 2 violated: rows " + std::to_string(i) + " and " +
                   std::to_string(next) + " share " + std::to_string(shared) +
                   " bits, need " + std::to_string(c.overlap));
    }
  }
}

SeavConfig make_seav_config(unsigned r, unsigned rows, unsigned overlap, std::uint32_t theta,
                            unsigned g, unsigned address_bits) {
  SeavConfig c;
  c.r = r;
  c.rows = rows;
  c.overlap = overlap;
  c.g = g;
  c.address_bits = address_bits;
  c.theta = theta;
  if (theta == 0) config_error("theta must be >= 1");
  if (g == 0) config_error("g must be in [3, 64]");
  c.tau = tau_from_theta(theta, g);
  if (address_bits == 0 || address_bits > 32 || r >= address_bits) {
    validate_seav_config(c);  // reports the precise problem
  }
  if (rows < 2) config_error("rows must be >= 2: a row needs an overlap partner");
  if (rows > kMaxRows) config_error("rows must be <= " + std::to_string(kMaxRows));
  const unsigned lp = c.lp_bits();
  const unsigned step = (lp + rows - 1) / rows;
  for (unsigned i = 0; i < rows; ++i) {
    c.index_start.push_back((i * step) % lp);
    c.index_bits.push_back(step + overlap);
    c.row_width.push_back(step + overlap <= kMaxIndexBits ? std::uint32_t{1} << (step + overlap)
                                                          : 0);
  }
  validate_seav_config(c);
  return c;
}

std::uint32_t index_of(const SeavConfig& config, unsigned row, std::uint32_t lp) {
  if (row >= config.rows) fail(ErrorCode::invalid_argument, "row out of range");
  return detail::extract_wrapped(lp, config.index_start[row], config.index_bits[row],
                                 config.lp_bits());
}

bool lp_from_indices_checked(const SeavConfig& config, std::span<const std::uint32_t> indices,
                             std::uint32_t& lp) {
  if (indices.size() != config.rows) {
    fail(ErrorCode::invalid_argument, "need one index per row");
  }
  const unsigned width = config.lp_bits();
  std::uint64_t value = 0;
  std::uint64_t known = 0;
  bool consistent = true;
  for (unsigned i = 0; i < config.rows; ++i) {
    const auto idx = static_cast<std::uint32_t>(indices[i] & detail::low_mask(config.index_bits[i]));
    const std::uint64_t bits = detail::deposit_wrapped(idx, config.index_start[i], width);
    const std::uint64_t span = row_span_mask(config, i);
    if (((value ^ bits) & known & span) != 0) consistent = false;
    value = (value & ~span) | bits;
    known |= span;
  }
  lp = static_cast<std::uint32_t>(value);
  return consistent;
}

std::uint32_t lp_from_indices(const SeavConfig& config, std::span<const std::uint32_t> indices) {
  std::uint32_t lp = 0;
  lp_from_indices_checked(config, indices, lp);
  return lp;
}

SeavSketch::SeavSketch(SeavConfig config, SeedSet seeds)
    : config_(std::move(config)), seeds_(std::move(seeds)) {
  validate_seav_config(config_);
  std::size_t offset = 0;
  for (auto w : config_.row_width) {
    row_offset_.push_back(offset);
    offset += w;
  }
  array_registers_ = offset;
  bits_ = BitArray(config_.register_count() * config_.g);
}

ShortEstimator SeavSketch::estimator(std::uint32_t rp, unsigned row, std::uint32_t column) const {
  if (rp >= config_.array_count() || row >= config_.rows || column >= config_.row_width[row]) {
    fail(ErrorCode::invalid_argument, "short register coordinates out of range");
  }
  return ShortEstimator(config_.g,
                        bits_.extract(register_index(rp, row, column) * config_.g, config_.g));
}

void SeavSketch::merge(const SeavSketch& other) {
  if (other.config_ != config_ || other.seeds_ != seeds_) {
    fail(ErrorCode::merge_incompatible, "cannot merge short estimator vectors with different "
                                        "configuration or seeds");
  }
  bits_.or_with(other.bits_);
}

namespace {

struct HotRegister {
  std::uint32_t column;
  std::uint64_t bits;
};

// Depth-first enumeration of candidate index tuples for one array.
class ArrayRestorer {
 public:
  ArrayRestorer(const SeavSketch& sketch, std::uint32_t rp, std::size_t cap)
      : sketch_(sketch), config_(sketch.config()), rp_(rp), cap_(cap) {
    const unsigned width = config_.lp_bits();
    std::uint64_t covered = 0;
    hot_.resize(config_.rows);
    known_index_mask_.resize(config_.rows);
    for (unsigned row = 0; row < config_.rows; ++row) {
      known_index_mask_[row] = detail::extract_wrapped(static_cast<std::uint32_t>(covered),
                                                       config_.index_start[row],
                                                       config_.index_bits[row], width);
      covered |= row_span_mask(config_, row);
      for (std::uint32_t col = 0; col < config_.row_width[row]; ++col) {
        const std::uint64_t bits = sketch_.bits().extract(
            sketch_.register_index(rp, row, col) * config_.g, config_.g);
        if (std::popcount(bits) >= static_cast<int>(ShortEstimator::kHotWeight)) {
          hot_[row].push_back({col, bits});
        }
      }
      // bucket by the bits already fixed by earlier rows
      const auto mask = known_index_mask_[row];
      std::stable_sort(hot_[row].begin(), hot_[row].end(),
                       [mask](const HotRegister& a, const HotRegister& b) {
                         return (a.column & mask) < (b.column & mask);
                       });
    }
  }

  bool run(std::vector<CandidateHost>& out) {
    for (const auto& row : hot_) {
      if (row.empty()) return true;
    }
    return descend(0, 0, detail::low_mask(config_.g), out);
  }

 private:
  bool descend(unsigned row, std::uint32_t lp, std::uint64_t union_bits,
               std::vector<CandidateHost>& out) {
    if (row == config_.rows) {
      out.push_back({(lp << config_.r) | rp_, rp_,
                     static_cast<unsigned>(std::popcount(union_bits))});
      return true;
    }
    const auto mask = known_index_mask_[row];
    const std::uint32_t key =
        detail::extract_wrapped(lp, config_.index_start[row], config_.index_bits[row],
                                config_.lp_bits()) &
        mask;
    const auto& hot = hot_[row];
    auto it = std::lower_bound(hot.begin(), hot.end(), key,
                               [mask](const HotRegister& h, std::uint32_t k) {
                                 return (h.column & mask) < k;
                               });
    for (; it != hot.end() && (it->column & mask) == key; ++it) {
      const std::uint64_t joined = union_bits & it->bits;
      // the AND only loses bits, so a cold partial union stays cold
      if (std::popcount(joined) < static_cast<int>(ShortEstimator::kHotWeight)) continue;
      if (++visited_ > cap_) return false;
      const std::uint32_t next_lp =
          lp | detail::deposit_wrapped(it->column, config_.index_start[row], config_.lp_bits());
      if (!descend(row + 1, next_lp, joined, out)) return false;
    }
    return true;
  }

  const SeavSketch& sketch_;
  const SeavConfig& config_;
  std::uint32_t rp_;
  std::size_t cap_;
  std::size_t visited_ = 0;
  std::vector<std::vector<HotRegister>> hot_;
  std::vector<std::uint32_t> known_index_mask_;
};

}  // namespace

void SeavSketch::restore_array(std::uint32_t rp, std::size_t cap, RestoreResult& out) const {
  std::vector<CandidateHost> found;
  ArrayRestorer restorer(*this, rp, cap);
  if (!restorer.run(found)) {
    out.overflowed.push_back(rp);
    return;
  }
  out.candidates.insert(out.candidates.end(), found.begin(), found.end());
}

RestoreResult SeavSketch::restore(std::size_t cap, unsigned threads) const {
  const std::uint32_t arrays = config_.array_count();
  threads = std::clamp<unsigned>(threads, 1, arrays);
  std::vector<RestoreResult> partial(threads);
  if (threads == 1) {
    for (std::uint32_t rp = 0; rp < arrays; ++rp) restore_array(rp, cap, partial[0]);
  } else {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([this, t, threads, arrays, cap, &partial] {
        for (std::uint32_t rp = t; rp < arrays; rp += threads) restore_array(rp, cap, partial[t]);
      });
    }
  }
  RestoreResult result;
  for (auto& p : partial) {
    result.candidates.insert(result.candidates.end(), p.candidates.begin(), p.candidates.end());
    result.overflowed.insert(result.overflowed.end(), p.overflowed.begin(), p.overflowed.end());
  }
  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const CandidateHost& a, const CandidateHost& b) { return a.ip < b.ip; });
  result.candidates.erase(std::unique(result.candidates.begin(), result.candidates.end(),
                                      [](const CandidateHost& a, const CandidateHost& b) {
                                        return a.ip == b.ip;
                                      }),
                          result.candidates.end());
  std::sort(result.overflowed.begin(), result.overflowed.end());
  return result;
}

}  // namespace sspd
