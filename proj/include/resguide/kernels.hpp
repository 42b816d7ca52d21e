#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "resguide/image.hpp"

namespace resguide {

/// Square filter with odd side, applied in correlation form (unflipped).
struct Kernel {
    std::string name;
    std::size_t size = 0;
    std::vector<double> coefficients;  // row-major, size * size

    std::size_t radius() const noexcept { return size / 2; }
    double at(std::size_t row, std::size_t col) const { return coefficients[row * size + col]; }
    double sum() const noexcept;
};

Kernel make_mean_kernel(std::size_t size);

/// Fixed filter groups used by the guidance components and the HILL baseline.
struct KernelBank {
    std::vector<Kernel> h1;  // KB3, KV5
    std::vector<Kernel> l1;  // MEAN3
    std::vector<Kernel> l2;  // MEAN11, MEAN7
    std::vector<Kernel> h2;  // SRM01..SRM30
    Kernel mean15;           // HILL cost aggregation

    const Kernel& kb3() const { return h1[0]; }
    const Kernel& kv5() const { return h1[1]; }
    const Kernel& mean3() const { return l1[0]; }
};

/// One row of the embedded SRM table: 5x5 integer numerators over a common
/// divisor (the magnitude of the central coefficient).
struct SrmTableEntry {
    int divisor;
    std::array<int, 25> numerators;
};

inline constexpr std::size_t kSrmKernelCount = 30;

std::span<const SrmTableEntry> srm_table();
std::uint64_t srm_table_checksum(std::span<const SrmTableEntry> table);

/// Checksum of the shipped table; load fails if the table does not hash to it.
extern const std::uint64_t kSrmTableChecksum;

/// Builds the bank from the given SRM table, verifying its checksum.
/// Throws std::runtime_error("kernel table checksum mismatch") on corruption.
KernelBank kernel_bank_from_table(std::span<const SrmTableEntry> table, std::uint64_t expected_checksum);

KernelBank kernel_bank_load();

/// Process-wide immutable bank, built on first use.
const KernelBank& default_kernel_bank();

/// Reflect index into [0, n) without repeating the edge sample (-1 -> 1, n -> n-2).
inline std::ptrdiff_t mirror_index(std::ptrdiff_t i, std::ptrdiff_t n) noexcept {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
}

/// Same-size correlation with mirror padding.
///
/// Each output pixel accumulates kernel taps in raster order, so results do not
/// depend on how the work is scheduled. Throws std::invalid_argument with
/// "image too small" when a side does not exceed the kernel radius (mirror
/// padding undefined) and "non-finite values" on NaN/Inf input.
RealMap convolve(const RealMap& input, const Kernel& kernel);

/// Exact adjoint of convolve(): <convolve(u), v> == <u, convolve_adjoint(v)>.
/// Reflected taps are scattered back onto the pixels they were read from.
RealMap convolve_adjoint(const RealMap& grad_output, const Kernel& kernel);

/// Plain-text listing: "<name> <size>" header, then rows of coefficients with
/// 12 significant digits, blank line between kernels.
std::string dump_kernels(const KernelBank& bank);

}  // namespace resguide
