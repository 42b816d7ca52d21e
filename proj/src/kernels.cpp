#include "resguide/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace resguide {
namespace {

// 30 SRM base kernels, each laid out on a 5x5 support and normalized by the
// magnitude of its central coefficient.
constexpr std::array<SrmTableEntry, kSrmKernelCount> kSrmTable = {{
    // first-order
    { 1, {  0,  0,  0,  0,  0,   0,  1,  0,  0,  0,   0,  0, -1,  0,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  1,  0,  0,   0,  0, -1,  0,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  0,  1,  0,   0,  0, -1,  0,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  0, -1,  1,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  0, -1,  0,  0,   0,  0,  0,  1,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  0, -1,  0,  0,   0,  0,  1,  0,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  0, -1,  0,  0,   0,  1,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 1, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  1, -1,  0,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    // second-order
    { 2, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  1, -2,  1,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 2, {  0,  0,  0,  0,  0,   0,  0,  1,  0,  0,   0,  0, -2,  0,  0,   0,  0,  1,  0,  0,   0,  0,  0,  0,  0}},
    { 2, {  0,  0,  0,  0,  0,   0,  1,  0,  0,  0,   0,  0, -2,  0,  0,   0,  0,  0,  1,  0,   0,  0,  0,  0,  0}},
    { 2, {  0,  0,  0,  0,  0,   0,  0,  0,  1,  0,   0,  0, -2,  0,  0,   0,  1,  0,  0,  0,   0,  0,  0,  0,  0}},
    // third-order
    { 3, { -1,  0,  0,  0,  0,   0,  3,  0,  0,  0,   0,  0, -3,  0,  0,   0,  0,  0,  1,  0,   0,  0,  0,  0,  0}},
    { 3, {  0,  0, -1,  0,  0,   0,  0,  3,  0,  0,   0,  0, -3,  0,  0,   0,  0,  1,  0,  0,   0,  0,  0,  0,  0}},
    { 3, {  0,  0,  0,  0, -1,   0,  0,  0,  3,  0,   0,  0, -3,  0,  0,   0,  1,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 3, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  1, -3,  3, -1,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 3, {  0,  0,  0,  0,  0,   0,  1,  0,  0,  0,   0,  0, -3,  0,  0,   0,  0,  0,  3,  0,   0,  0,  0,  0, -1}},
    { 3, {  0,  0,  0,  0,  0,   0,  0,  1,  0,  0,   0,  0, -3,  0,  0,   0,  0,  3,  0,  0,   0,  0, -1,  0,  0}},
    { 3, {  0,  0,  0,  0,  0,   0,  0,  0,  1,  0,   0,  0, -3,  0,  0,   0,  3,  0,  0,  0,  -1,  0,  0,  0,  0}},
    { 3, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,  -1,  3, -3,  1,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    // square 3x3
    { 4, {  0,  0,  0,  0,  0,   0, -1,  2, -1,  0,   0,  2, -4,  2,  0,   0, -1,  2, -1,  0,   0,  0,  0,  0,  0}},
    // edge 3x3
    { 4, {  0,  0,  0,  0,  0,   0, -1,  2, -1,  0,   0,  2, -4,  2,  0,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    { 4, {  0,  0,  0,  0,  0,   0,  0,  2, -1,  0,   0,  0, -4,  2,  0,   0,  0,  2, -1,  0,   0,  0,  0,  0,  0}},
    { 4, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,   0,  2, -4,  2,  0,   0, -1,  2, -1,  0,   0,  0,  0,  0,  0}},
    { 4, {  0,  0,  0,  0,  0,   0, -1,  2,  0,  0,   0,  2, -4,  0,  0,   0, -1,  2,  0,  0,   0,  0,  0,  0,  0}},
    // square 5x5
    {12, { -1,  2, -2,  2, -1,   2, -6,  8, -6,  2,  -2,  8,-12,  8, -2,   2, -6,  8, -6,  2,  -1,  2, -2,  2, -1}},
    // edge 5x5
    {12, { -1,  2, -2,  2, -1,   2, -6,  8, -6,  2,  -2,  8,-12,  8, -2,   0,  0,  0,  0,  0,   0,  0,  0,  0,  0}},
    {12, {  0,  0, -2,  2, -1,   0,  0,  8, -6,  2,   0,  0,-12,  8, -2,   0,  0,  8, -6,  2,   0,  0, -2,  2, -1}},
    {12, {  0,  0,  0,  0,  0,   0,  0,  0,  0,  0,  -2,  8,-12,  8, -2,   2, -6,  8, -6,  2,  -1,  2, -2,  2, -1}},
    {12, { -1,  2, -2,  0,  0,   2, -6,  8,  0,  0,  -2,  8,-12,  0,  0,   2, -6,  8,  0,  0,  -1,  2, -2,  0,  0}},
}};

struct Tap {
    std::ptrdiff_t dy;
    std::ptrdiff_t dx;
    double c;
};

std::vector<Tap> nonzero_taps(const Kernel& k) {
    std::vector<Tap> taps;
    const auto r = static_cast<std::ptrdiff_t>(k.radius());
    for (std::size_t i = 0; i < k.size; ++i) {
        for (std::size_t j = 0; j < k.size; ++j) {
            const double c = k.at(i, j);
            if (c != 0.0) taps.push_back({static_cast<std::ptrdiff_t>(i) - r, static_cast<std::ptrdiff_t>(j) - r, c});
        }
    }
    return taps;
}

void check_fits(const RealMap& m, const Kernel& k) {
    if (k.size == 0 || k.size % 2 == 0 || k.coefficients.size() != k.size * k.size) {
        throw std::invalid_argument("invalid kernel " + k.name);
    }
    if (m.width() <= k.radius() || m.height() <= k.radius()) {
        throw std::invalid_argument("image too small");
    }
}

// Column lookup for every horizontal offset in [-r, r]: cols[(dx + r) * w + x].
std::vector<std::size_t> mirrored_columns(std::size_t w, std::size_t r) {
    const auto n = static_cast<std::ptrdiff_t>(w);
    const auto rr = static_cast<std::ptrdiff_t>(r);
    std::vector<std::size_t> cols((2 * r + 1) * w);
    for (std::ptrdiff_t dx = -rr; dx <= rr; ++dx) {
        for (std::ptrdiff_t x = 0; x < n; ++x) {
            cols[static_cast<std::size_t>(dx + rr) * w + static_cast<std::size_t>(x)] =
                static_cast<std::size_t>(mirror_index(x + dx, n));
        }
    }
    return cols;
}

Kernel from_integers(std::string name, std::size_t size, std::span<const int> numerators, double divisor) {
    Kernel k{std::move(name), size, {}};
    k.coefficients.reserve(numerators.size());
    for (int v : numerators) k.coefficients.push_back(static_cast<double>(v) / divisor);
    return k;
}

}  // namespace

const std::uint64_t kSrmTableChecksum = 0xf6df79617ad251b5ULL;

double Kernel::sum() const noexcept {
    double s = 0.0;
    for (double c : coefficients) s += c;
    return s;
}

Kernel make_mean_kernel(std::size_t size) {
    Kernel k{"MEAN" + std::to_string(size), size, std::vector<double>(size * size, 1.0 / static_cast<double>(size * size))};
    return k;
}

std::span<const SrmTableEntry> srm_table() { return kSrmTable; }

std::uint64_t srm_table_checksum(std::span<const SrmTableEntry> table) {
    // FNV-1a over the little-endian bytes of every integer in the table.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](int v) {
        auto u = static_cast<std::uint32_t>(v);
        for (int b = 0; b < 4; ++b) {
            h ^= (u >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& e : table) {
        mix(e.divisor);
        for (int v : e.numerators) mix(v);
    }
    return h;
}

KernelBank kernel_bank_from_table(std::span<const SrmTableEntry> table, std::uint64_t expected_checksum) {
    if (table.size() != kSrmKernelCount || srm_table_checksum(table) != expected_checksum) {
        throw std::runtime_error("kernel table checksum mismatch");
    }
    static constexpr std::array<int, 9> kb3 = {-1, 2, -1, 2, -4, 2, -1, 2, -1};
    static constexpr std::array<int, 25> kv5 = {-1, 2,  -2, 2,  -1, 2,  -6, 8,  -6, 2,  -2, 8, -12,
                                                8,  -2, 2,  -6, 8,  -6, 2,  -1, 2,  -2, 2,  -1};
    KernelBank bank;
    bank.h1.push_back(from_integers("KB3", 3, kb3, 4.0));
    bank.h1.push_back(from_integers("KV5", 5, kv5, 12.0));
    bank.l1.push_back(make_mean_kernel(3));
    bank.l2.push_back(make_mean_kernel(11));
    bank.l2.push_back(make_mean_kernel(7));
    bank.mean15 = make_mean_kernel(15);
    for (std::size_t i = 0; i < table.size(); ++i) {
        char name[8];
        std::snprintf(name, sizeof name, "SRM%02zu", i + 1);
        if (table[i].divisor <= 0) throw std::runtime_error("kernel table checksum mismatch");
        bank.h2.push_back(from_integers(name, 5, table[i].numerators, table[i].divisor));
    }
    return bank;
}

KernelBank kernel_bank_load() { return kernel_bank_from_table(kSrmTable, kSrmTableChecksum); }

const KernelBank& default_kernel_bank() {
    static const KernelBank bank = kernel_bank_load();
    return bank;
}

RealMap convolve(const RealMap& input, const Kernel& kernel) {
    check_fits(input, kernel);
    if (!input.all_finite()) throw std::invalid_argument("non-finite values");

    const std::size_t w = input.width();
    const std::size_t h = input.height();
    const std::size_t r = kernel.radius();
    const auto taps = nonzero_taps(kernel);
    const auto cols = mirrored_columns(w, r);
    const auto rr = static_cast<std::ptrdiff_t>(r);

    RealMap out(w, h);
    auto src = input.values();
    auto dst = out.values();
    for (std::size_t y = 0; y < h; ++y) {
        double* row_out = dst.data() + y * w;
        for (const Tap& t : taps) {
            const auto sy = static_cast<std::size_t>(mirror_index(static_cast<std::ptrdiff_t>(y) + t.dy, static_cast<std::ptrdiff_t>(h)));
            const double* row_in = src.data() + sy * w;
            const std::size_t* col = cols.data() + static_cast<std::size_t>(t.dx + rr) * w;
            for (std::size_t x = 0; x < w; ++x) row_out[x] += t.c * row_in[col[x]];
        }
    }
    return out;
}

RealMap convolve_adjoint(const RealMap& grad_output, const Kernel& kernel) {
    check_fits(grad_output, kernel);
    if (!grad_output.all_finite()) throw std::invalid_argument("non-finite values");

    const std::size_t w = grad_output.width();
    const std::size_t h = grad_output.height();
    const std::size_t r = kernel.radius();
    const auto taps = nonzero_taps(kernel);
    const auto cols = mirrored_columns(w, r);
    const auto rr = static_cast<std::ptrdiff_t>(r);

    RealMap out(w, h);
    auto src = grad_output.values();
    auto dst = out.values();
    for (std::size_t y = 0; y < h; ++y) {
        const double* row_g = src.data() + y * w;
        for (const Tap& t : taps) {
            const auto sy = static_cast<std::size_t>(mirror_index(static_cast<std::ptrdiff_t>(y) + t.dy, static_cast<std::ptrdiff_t>(h)));
            double* row_in = dst.data() + sy * w;
            const std::size_t* col = cols.data() + static_cast<std::size_t>(t.dx + rr) * w;
            for (std::size_t x = 0; x < w; ++x) row_in[col[x]] += t.c * row_g[x];
        }
    }
    return out;
}

std::string dump_kernels(const KernelBank& bank) {
    std::string out;
    char buf[64];
    auto emit = [&](const Kernel& k) {
        if (!out.empty()) out += '\n';
        out += k.name + ' ' + std::to_string(k.size) + '\n';
        for (std::size_t i = 0; i < k.size; ++i) {
            for (std::size_t j = 0; j < k.size; ++j) {
                std::snprintf(buf, sizeof buf, "%.12g", k.at(i, j));
                if (j) out += ' ';
                out += buf;
            }
            out += '\n';
        }
    };
    for (const auto& k : bank.h1) emit(k);
    for (const auto& k : bank.l1) emit(k);
    for (const auto& k : bank.l2) emit(k);
    emit(bank.mean15);
    for (const auto& k : bank.h2) emit(k);
    return out;
}

}  // namespace resguide
