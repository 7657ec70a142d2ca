#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace ofdmml {

/// Operation classes tracked by the instrumentation counters.
enum class Op : std::size_t {
  complex_mul,
  complex_add,
  complex_div,
  real_mul,
  real_add,
  real_div,
  sqrt,
  activation,
  linear_solve,
  count_
};

inline constexpr std::size_t kOpClasses = static_cast<std::size_t>(Op::count_);

inline constexpr std::array<std::string_view, kOpClasses> kOpNames = {
    "complex_mul", "complex_add", "complex_div", "real_mul", "real_add",
    "real_div",    "sqrt",        "activation",  "linear_solve"};

/// Per-class operation counters. Counts only ever grow inside a measured region.
class FlopCounter {
 public:
  void add(Op op, std::uint64_t n) noexcept { counts_[index(op)] += n; }
  [[nodiscard]] std::uint64_t get(Op op) const noexcept { return counts_[index(op)]; }

  /// Real floating-point operation equivalent. A complex multiply is 6 real
  /// flops, a complex add 2, a complex divide 11; an activation evaluation
  /// and a square root count as one flop each. Linear-solve calls are
  /// bookkeeping only and contribute nothing.
  [[nodiscard]] std::uint64_t real_flops() const noexcept {
    return 6 * get(Op::complex_mul) + 2 * get(Op::complex_add) + 11 * get(Op::complex_div) +
           get(Op::real_mul) + get(Op::real_add) + get(Op::real_div) + get(Op::sqrt) +
           get(Op::activation);
  }

  void reset() noexcept { counts_.fill(0); }

 private:
  static constexpr std::size_t index(Op op) noexcept { return static_cast<std::size_t>(op); }
  std::array<std::uint64_t, kOpClasses> counts_{};
};

namespace detail {
inline thread_local FlopCounter* active_counter = nullptr;
}

/// Routes counts from instrumented kernels on this thread into `counter`
/// for the lifetime of the scope. Scopes nest; the innermost wins.
class FlopScope {
 public:
  explicit FlopScope(FlopCounter& counter) noexcept : previous_(detail::active_counter) {
    detail::active_counter = &counter;
  }
  ~FlopScope() { detail::active_counter = previous_; }
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

 private:
  FlopCounter* previous_;
};

inline void count(Op op, std::uint64_t n) noexcept {
  if (auto* c = detail::active_counter) c->add(op, n);
}

}  // namespace ofdmml
