#include "phaseavg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace phaseavg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Twiddle factors exp(-2*pi*i*j/n) for j < n/2, cached per transform size.
const std::vector<Complex>& twiddles_for(std::size_t n) {
    thread_local std::map<std::size_t, std::vector<Complex>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<Complex> w(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double angle = -kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        w[j] = {std::cos(angle), std::sin(angle)};
    }
    return cache.emplace(n, std::move(w)).first->second;
}

/// In-place radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse (both
/// unnormalised).
void fft_inplace(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const auto& w = twiddles_for(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        const std::size_t half = len / 2;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < half; ++k) {
                Complex tw = w[k * stride];
                if (sign > 0) tw = std::conj(tw);
                const Complex u = a[base + k];
                const Complex v = a[base + k + half] * tw;
                a[base + k] = u + v;
                a[base + k + half] = u - v;
            }
        }
    }
}

void require_power_of_two(std::size_t n, const char* what) {
    if (!is_power_of_two(n))
        throw std::invalid_argument(std::string(what) + ": length must be a power of two");
}

}  // namespace

SpectralState::SpectralState(int n_fields, int n_modes)
    : n_fields_(n_fields),
      n_modes_(n_modes),
      data_(static_cast<std::size_t>(n_fields) * static_cast<std::size_t>(n_modes)) {
    if (n_fields < 1 || n_modes < 1)
        throw std::invalid_argument("SpectralState: dimensions must be positive");
}

std::span<Complex> SpectralState::row(int field) {
    return {data_.data() + index(field, 0), static_cast<std::size_t>(n_modes_)};
}

std::span<const Complex> SpectralState::row(int field) const {
    return {data_.data() + index(field, 0), static_cast<std::size_t>(n_modes_)};
}

void SpectralState::set_zero() { std::fill(data_.begin(), data_.end(), Complex{}); }

bool same_shape(const SpectralState& a, const SpectralState& b) {
    return a.n_fields() == b.n_fields() && a.n_modes() == b.n_modes();
}

bool all_finite(const SpectralState& s) {
    const Complex* p = s.data();
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!std::isfinite(p[i].real()) || !std::isfinite(p[i].imag())) return false;
    return true;
}

bool bit_equal(const SpectralState& a, const SpectralState& b) {
    if (!same_shape(a, b)) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(Complex)) == 0;
}

namespace {
void require_same_shape(const SpectralState& a, const SpectralState& b, const char* what) {
    if (!same_shape(a, b)) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}
}  // namespace

void add_scaled(Complex alpha, const SpectralState& x, SpectralState& y) {
    require_same_shape(x, y, "add_scaled");
    Complex* yp = y.data();
    const Complex* xp = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) yp[i] += alpha * xp[i];
}

void add_scaled(double alpha, const SpectralState& x, SpectralState& y) {
    require_same_shape(x, y, "add_scaled");
    Complex* yp = y.data();
    const Complex* xp = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) yp[i] += alpha * xp[i];
}

void add_in_place(SpectralState& y, const SpectralState& x) {
    require_same_shape(x, y, "add_in_place");
    Complex* yp = y.data();
    const Complex* xp = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) yp[i] += xp[i];
}

void sub_in_place(SpectralState& y, const SpectralState& x) {
    require_same_shape(x, y, "sub_in_place");
    Complex* yp = y.data();
    const Complex* xp = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) yp[i] -= xp[i];
}

void scale_in_place(SpectralState& y, double alpha) {
    Complex* yp = y.data();
    for (std::size_t i = 0; i < y.size(); ++i) yp[i] *= alpha;
}

double l1_difference(const SpectralState& a, const SpectralState& b) {
    require_same_shape(a, b, "l1_difference");
    double sum = 0.0;
    const Complex* ap = a.data();
    const Complex* bp = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(ap[i] - bp[i]);
    return sum;
}

double max_abs_difference(const SpectralState& a, const SpectralState& b) {
    require_same_shape(a, b, "max_abs_difference");
    double m = 0.0;
    const Complex* ap = a.data();
    const Complex* bp = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(ap[i] - bp[i]));
    return m;
}

double max_abs(const SpectralState& s) {
    double m = 0.0;
    const Complex* p = s.data();
    for (std::size_t i = 0; i < s.size(); ++i) m = std::max(m, std::abs(p[i]));
    return m;
}

double conjugate_symmetry_defect(const SpectralState& s) {
    const int n = s.n_modes();
    double defect = 0.0;
    for (int f = 0; f < s.n_fields(); ++f)
        for (int j = 0; j < n; ++j) {
            const int jc = (n - j) % n;
            defect = std::max(defect, std::abs(s(f, j) - std::conj(s(f, jc))));
        }
    return defect;
}

GridSpec::GridSpec(int n_x) : n_(n_x) {
    if (n_x < 2 || !is_power_of_two(static_cast<std::size_t>(n_x)))
        throw std::invalid_argument("GridSpec: N_x must be a power of two >= 2");
    wavenumbers_.resize(n_x);
    for (int j = 0; j < n_x; ++j) wavenumbers_[j] = (j <= n_x / 2) ? j : j - n_x;
}

double GridSpec::length() const { return kTwoPi; }

double GridSpec::x(int i) const { return kTwoPi * static_cast<double>(i) / n_; }

std::vector<Complex> dft_forward(std::span<const double> field) {
    require_power_of_two(field.size(), "dft_forward");
    std::vector<Complex> a(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) a[i] = field[i];
    fft_inplace(a, -1);
    return a;
}

std::vector<Complex> dft_forward(std::span<const Complex> field) {
    require_power_of_two(field.size(), "dft_forward");
    std::vector<Complex> a(field.begin(), field.end());
    fft_inplace(a, -1);
    return a;
}

std::vector<Complex> dft_inverse(std::span<const Complex> spectrum) {
    require_power_of_two(spectrum.size(), "dft_inverse");
    std::vector<Complex> a(spectrum.begin(), spectrum.end());
    fft_inplace(a, +1);
    const double inv_n = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= inv_n;
    return a;
}

std::vector<Complex> circular_convolution(std::span<const Complex> a,
                                          std::span<const Complex> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("circular_convolution: length mismatch");
    const std::size_t n = a.size();
    std::vector<Complex> g(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        Complex sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = (i >= j) ? (i - j) : (i + n - j);
            sum += a[j] * b[idx];
        }
        g[i] = inv_n * sum;
    }
    return g;
}

BlockOperator::BlockOperator(int n_modes, int block_dim)
    : n_modes_(n_modes),
      dim_(block_dim),
      blocks_(static_cast<std::size_t>(n_modes) * block_dim * block_dim) {
    if (n_modes < 1 || block_dim < 1)
        throw std::invalid_argument("BlockOperator: dimensions must be positive");
}

BlockOperator BlockOperator::identity(int n_modes, int block_dim) {
    BlockOperator op(n_modes, block_dim);
    for (int m = 0; m < n_modes; ++m)
        for (int r = 0; r < block_dim; ++r) op.at(m, r, r) = 1.0;
    return op;
}

void BlockOperator::resize(int n_modes, int block_dim) {
    if (n_modes == n_modes_ && block_dim == dim_) return;
    n_modes_ = n_modes;
    dim_ = block_dim;
    blocks_.assign(static_cast<std::size_t>(n_modes) * block_dim * block_dim, Complex{});
}

void BlockOperator::set_zero() { std::fill(blocks_.begin(), blocks_.end(), Complex{}); }

void apply_block(const BlockOperator& op, const SpectralState& x, SpectralState& out) {
    if (op.block_dim() != x.n_fields() || op.n_modes() != x.n_modes())
        throw std::invalid_argument("apply_block: shape mismatch");
    if (&out == &x) throw std::invalid_argument("apply_block: out must not alias x");
    if (!same_shape(out, x)) out = SpectralState(x.n_fields(), x.n_modes());
    const int m = op.block_dim();
    const int modes = op.n_modes();
    for (int j = 0; j < modes; ++j)
        for (int r = 0; r < m; ++r) {
            Complex sum = 0.0;
            for (int c = 0; c < m; ++c) sum += op.at(j, r, c) * x(c, j);
            out(r, j) = sum;
        }
}

SpectralState apply_block(const BlockOperator& op, const SpectralState& x) {
    SpectralState out(x.n_fields(), x.n_modes());
    apply_block(op, x, out);
    return out;
}

BlockOperator compose(const BlockOperator& a, const BlockOperator& b) {
    if (a.block_dim() != b.block_dim() || a.n_modes() != b.n_modes())
        throw std::invalid_argument("compose: shape mismatch");
    const int m = a.block_dim();
    BlockOperator c(a.n_modes(), m);
    for (int j = 0; j < a.n_modes(); ++j)
        for (int r = 0; r < m; ++r)
            for (int col = 0; col < m; ++col) {
                Complex sum = 0.0;
                for (int k = 0; k < m; ++k) sum += a.at(j, r, k) * b.at(j, k, col);
                c.at(j, r, col) = sum;
            }
    return c;
}

double skew_hermitian_defect(const BlockOperator& op) {
    double defect = 0.0;
    for (int j = 0; j < op.n_modes(); ++j)
        for (int r = 0; r < op.block_dim(); ++r)
            for (int c = 0; c < op.block_dim(); ++c)
                defect = std::max(defect, std::abs(op.at(j, r, c) + std::conj(op.at(j, c, r))));
    return defect;
}

}  // namespace phaseavg
