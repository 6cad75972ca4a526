#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace phaseavg {

using Complex = std::complex<double>;

/// Solution vector in spectral space: n_fields rows of n_modes complex
/// coefficients, stored row-major. ODE systems use n_modes == 1; the
/// pseudospectral PDE systems keep one full (unpacked) complex spectrum
/// per prognostic field.
class SpectralState {
public:
    SpectralState() = default;
    SpectralState(int n_fields, int n_modes);

    int n_fields() const { return n_fields_; }
    int n_modes() const { return n_modes_; }
    std::size_t size() const { return data_.size(); }

    Complex& operator()(int field, int mode) { return data_[index(field, mode)]; }
    const Complex& operator()(int field, int mode) const { return data_[index(field, mode)]; }

    std::span<Complex> row(int field);
    std::span<const Complex> row(int field) const;

    Complex* data() { return data_.data(); }
    const Complex* data() const { return data_.data(); }

    void set_zero();

private:
    std::size_t index(int field, int mode) const {
        return static_cast<std::size_t>(field) * static_cast<std::size_t>(n_modes_) +
               static_cast<std::size_t>(mode);
    }

    int n_fields_ = 0;
    int n_modes_ = 0;
    std::vector<Complex> data_;
};

bool same_shape(const SpectralState& a, const SpectralState& b);
bool all_finite(const SpectralState& s);
bool bit_equal(const SpectralState& a, const SpectralState& b);

/// y += alpha * x (shapes must agree)
void add_scaled(Complex alpha, const SpectralState& x, SpectralState& y);
void add_scaled(double alpha, const SpectralState& x, SpectralState& y);
void add_in_place(SpectralState& y, const SpectralState& x);
void sub_in_place(SpectralState& y, const SpectralState& x);
void scale_in_place(SpectralState& y, double alpha);

/// Sum over all entries of the complex modulus |a - b|.
double l1_difference(const SpectralState& a, const SpectralState& b);
double max_abs_difference(const SpectralState& a, const SpectralState& b);
double max_abs(const SpectralState& s);

/// Largest |s(f,j) - conj(s(f,(N-j) mod N))| over all entries. Spectra of
/// real physical fields have zero defect.
double conjugate_symmetry_defect(const SpectralState& s);

/// Periodic grid on [0, 2*pi) with a power-of-two point count and signed
/// integer wavenumbers in DFT ordering: k_j = j for j <= N/2, j - N
/// otherwise.
class GridSpec {
public:
    explicit GridSpec(int n_x);

    int size() const { return n_; }
    double length() const;
    double x(int i) const;
    int wavenumber(int j) const { return wavenumbers_[j]; }
    const std::vector<int>& wavenumbers() const { return wavenumbers_; }

private:
    int n_ = 0;
    std::vector<int> wavenumbers_;
};

/// Unnormalised forward DFT: X_j = sum_n x_n exp(-2*pi*i*j*n/N).
/// Length must be a power of two.
std::vector<Complex> dft_forward(std::span<const double> field);
std::vector<Complex> dft_forward(std::span<const Complex> field);

/// Exact inverse of dft_forward, including the 1/N normalisation.
std::vector<Complex> dft_inverse(std::span<const Complex> spectrum);

/// Discrete circular convolution g_i = (1/N) sum_j a_j b_{(i-j) mod N}.
/// Computed by direct summation; equal lengths required.
std::vector<Complex> circular_convolution(std::span<const Complex> a,
                                          std::span<const Complex> b);

/// Block-diagonal linear operator: one m-by-m complex matrix per spectral
/// mode, m = n_fields. Realises L, L^-1 (or the pseudoinverse L^+),
/// exp(+-t L / eps) and the dissipation operator of the model systems.
class BlockOperator {
public:
    BlockOperator() = default;
    BlockOperator(int n_modes, int block_dim);

    static BlockOperator identity(int n_modes, int block_dim);

    int n_modes() const { return n_modes_; }
    int block_dim() const { return dim_; }

    Complex& at(int mode, int row, int col) { return blocks_[index(mode, row, col)]; }
    const Complex& at(int mode, int row, int col) const { return blocks_[index(mode, row, col)]; }

    /// Reshape without reallocating when the shape already matches.
    void resize(int n_modes, int block_dim);
    void set_zero();

private:
    std::size_t index(int mode, int row, int col) const {
        return (static_cast<std::size_t>(mode) * dim_ + row) * dim_ + col;
    }

    int n_modes_ = 0;
    int dim_ = 0;
    std::vector<Complex> blocks_;
};

/// Per-mode matrix-vector product. The out-parameter overload requires
/// out to be distinct from x.
SpectralState apply_block(const BlockOperator& op, const SpectralState& x);
void apply_block(const BlockOperator& op, const SpectralState& x, SpectralState& out);

/// c = a o b (per-mode matrix product: c_j = a_j * b_j).
BlockOperator compose(const BlockOperator& a, const BlockOperator& b);

/// Largest entry of |B_j + B_j^H| over all modes; zero for skew-Hermitian
/// operators.
double skew_hermitian_defect(const BlockOperator& op);

}  // namespace phaseavg
