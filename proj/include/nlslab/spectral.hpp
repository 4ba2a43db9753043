#pragma once

// Periodic pseudo-spectral substrate: grid, transforms, multipliers,
// dealiased products and Sobolev norms.
//
// Spectra use the continuum convention u^(k) = (1/2pi) int u e^{-ikx} dx
// restricted to the cell, so that u(x) = sum_j u^_j e^{i k_j x} dk with
// dk = 2pi/L.  Products of fields correspond to convolutions with the dk
// quadrature weight, which lets Fourier-side formulas be transcribed as is.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlslab {

using cplx = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = std::numbers::pi;

class PeriodicGrid {
public:
    PeriodicGrid() = default;
    PeriodicGrid(double L, std::size_t N) : L_(L), N_(N)
    {
        if (!(L > 0.0) || !std::isfinite(L))
            throw std::invalid_argument("PeriodicGrid: length must be positive");
        if (N < 16 || N % 2 != 0)
            throw std::invalid_argument("PeriodicGrid: N must be even and >= 16");
    }

    double length() const { return L_; }
    std::size_t size() const { return N_; }
    double dx() const { return L_ / static_cast<double>(N_); }
    double dk() const { return 2.0 * kPi / L_; }
    double x(std::size_t i) const { return dx() * static_cast<double>(i); }

    // Signed mode number of storage slot i (FFT order).
    long mode(std::size_t i) const
    {
        const long n = static_cast<long>(N_);
        const long j = static_cast<long>(i);
        return j < n / 2 ? j : j - n;
    }
    // Storage slot of signed mode j in [-N/2, N/2).
    std::size_t slot(long j) const
    {
        const long n = static_cast<long>(N_);
        return static_cast<std::size_t>(j >= 0 ? j : j + n);
    }
    double k(std::size_t i) const { return dk() * static_cast<double>(mode(i)); }
    std::size_t nyquist_slot() const { return N_ / 2; }
    bool is_nyquist(std::size_t i) const { return i == N_ / 2; }
    bool contains_mode(long j) const
    {
        const long n = static_cast<long>(N_);
        return j >= -n / 2 && j < n / 2;
    }

    bool operator==(const PeriodicGrid& o) const { return L_ == o.L_ && N_ == o.N_; }
    bool operator!=(const PeriodicGrid& o) const { return !(*this == o); }

private:
    double L_ = 2.0 * kPi;
    std::size_t N_ = 16;
};

inline PeriodicGrid make_grid(double L, std::size_t N) { return PeriodicGrid(L, N); }

inline void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b)
{
    if (a != b) throw std::invalid_argument("grid mismatch");
}

// ---------------------------------------------------------------------------
// FFT backend.  Plans are created once per size under a lock; execution uses
// the new-array interface so concurrent callers never share buffers.

namespace detail {

struct FftPlans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

inline std::mutex& fftw_mutex()
{
    static std::mutex m;
    return m;
}

inline const FftPlans& plans_for(std::size_t n)
{
    static std::map<std::size_t, std::unique_ptr<FftPlans>> cache;
    std::lock_guard<std::mutex> lock(fftw_mutex());
    auto it = cache.find(n);
    if (it != cache.end()) return *it->second;
    auto p = std::make_unique<FftPlans>();
    auto* a = fftw_alloc_complex(n);
    auto* b = fftw_alloc_complex(n);
    const int ni = static_cast<int>(n);
    p->fwd = fftw_plan_dft_1d(ni, a, b, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p->bwd = fftw_plan_dft_1d(ni, a, b, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    auto& ref = *p;
    cache.emplace(n, std::move(p));
    return ref;
}

// Unnormalised DFT, out_j = sum_n in_n e^{-2pi i jn/N}.
inline void dft(const cplx* in, cplx* out, std::size_t n)
{
    const auto& p = plans_for(n);
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

// Unnormalised inverse DFT, out_n = sum_j in_j e^{+2pi i jn/N}.
inline void idft(const cplx* in, cplx* out, std::size_t n)
{
    const auto& p = plans_for(n);
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace detail

// Samples -> continuum-convention coefficients (FFT order).
inline CVec forward(const PeriodicGrid& g, const CVec& u)
{
    if (u.size() != g.size()) throw std::invalid_argument("forward: size mismatch");
    CVec out(g.size());
    detail::dft(u.data(), out.data(), g.size());
    const double s = g.dx() / (2.0 * kPi);
    for (auto& c : out) c *= s;
    return out;
}

inline CVec forward(const PeriodicGrid& g, const RVec& u)
{
    CVec c(u.begin(), u.end());
    return forward(g, c);
}

// Coefficients -> samples.
inline CVec inverse(const PeriodicGrid& g, const CVec& uh)
{
    if (uh.size() != g.size()) throw std::invalid_argument("inverse: size mismatch");
    CVec out(g.size());
    detail::idft(uh.data(), out.data(), g.size());
    const double s = g.dk();
    for (auto& c : out) c *= s;
    return out;
}

inline RVec real_part(const CVec& v)
{
    RVec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].real();
    return r;
}

inline RVec inverse_real(const PeriodicGrid& g, const CVec& uh) { return real_part(inverse(g, uh)); }

// ---------------------------------------------------------------------------
// Field: samples and spectrum, always paired.  Immutable after construction.

class Field {
public:
    Field() = default;

    static Field from_samples(const PeriodicGrid& g, CVec samples)
    {
        Field f;
        f.grid_ = g;
        f.spec_ = forward(g, samples);
        f.samples_ = std::move(samples);
        return f;
    }
    static Field from_real(const PeriodicGrid& g, const RVec& samples)
    {
        return from_samples(g, CVec(samples.begin(), samples.end()));
    }
    static Field from_spectrum(const PeriodicGrid& g, CVec spec)
    {
        Field f;
        f.grid_ = g;
        f.samples_ = inverse(g, spec);
        f.spec_ = std::move(spec);
        return f;
    }
    static Field zeros(const PeriodicGrid& g)
    {
        Field f;
        f.grid_ = g;
        f.samples_.assign(g.size(), cplx{});
        f.spec_.assign(g.size(), cplx{});
        return f;
    }
    template <class Fn>
    static Field from_function(const PeriodicGrid& g, Fn&& fn)
    {
        CVec s(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) s[i] = cplx(fn(g.x(i)));
        return from_samples(g, std::move(s));
    }

    const PeriodicGrid& grid() const { return grid_; }
    const CVec& samples() const { return samples_; }
    const CVec& spectrum() const { return spec_; }
    RVec real() const { return real_part(samples_); }
    std::size_t size() const { return samples_.size(); }

    // Largest |Im u(x)| relative to max |u(x)|.
    double imag_residue() const
    {
        double im = 0.0, mag = 0.0;
        for (const auto& s : samples_) {
            im = std::max(im, std::abs(s.imag()));
            mag = std::max(mag, std::abs(s));
        }
        return mag > 0.0 ? im / mag : 0.0;
    }

private:
    PeriodicGrid grid_;
    CVec samples_;
    CVec spec_;
};

inline Field operator+(const Field& a, const Field& b)
{
    require_same_grid(a.grid(), b.grid());
    CVec s = a.spectrum();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += b.spectrum()[i];
    return Field::from_spectrum(a.grid(), std::move(s));
}

inline Field operator-(const Field& a, const Field& b)
{
    require_same_grid(a.grid(), b.grid());
    CVec s = a.spectrum();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= b.spectrum()[i];
    return Field::from_spectrum(a.grid(), std::move(s));
}

inline Field operator*(cplx c, const Field& a)
{
    CVec s = a.spectrum();
    for (auto& v : s) v *= c;
    return Field::from_spectrum(a.grid(), std::move(s));
}

// ---------------------------------------------------------------------------
// Fourier multipliers.

enum class Parity { Even, Odd, None };

class Multiplier {
public:
    using Symbol = std::function<cplx(double)>;

    // Tabulates the symbol on the lattice and verifies the declared parity.
    // Odd symbols have the self-conjugate Nyquist mode zeroed.
    Multiplier(const PeriodicGrid& g, Symbol sym, Parity parity) : grid_(g), parity_(parity)
    {
        values_.resize(g.size());
        double mx = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            values_[i] = sym(g.k(i));
            mx = std::max(mx, std::abs(values_[i]));
        }
        if (parity != Parity::None) {
            const double sgn = parity == Parity::Even ? 1.0 : -1.0;
            for (std::size_t i = 1; i < g.size(); ++i) {
                if (g.is_nyquist(i)) continue;
                const std::size_t j = g.size() - i;
                if (std::abs(values_[i] - sgn * values_[j]) > 1e-12 * std::max(mx, 1e-300))
                    throw std::invalid_argument("Multiplier: declared parity violated");
            }
        }
        if (parity == Parity::Odd) values_[g.nyquist_slot()] = 0.0;
    }

    const PeriodicGrid& grid() const { return grid_; }
    Parity parity() const { return parity_; }
    const CVec& values() const { return values_; }
    cplx operator[](std::size_t i) const { return values_[i]; }

    Multiplier operator*(const Multiplier& o) const
    {
        require_same_grid(grid_, o.grid_);
        Multiplier m = *this;
        for (std::size_t i = 0; i < values_.size(); ++i) m.values_[i] *= o.values_[i];
        if (parity_ == Parity::None || o.parity_ == Parity::None)
            m.parity_ = Parity::None;
        else
            m.parity_ = parity_ == o.parity_ ? Parity::Even : Parity::Odd;
        return m;
    }

private:
    PeriodicGrid grid_;
    Parity parity_;
    CVec values_;
};

inline CVec apply_multiplier(const CVec& spec, const Multiplier& m)
{
    if (spec.size() != m.values().size()) throw std::invalid_argument("grid mismatch");
    CVec out(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) out[i] = m[i] * spec[i];
    return out;
}

inline Field apply_multiplier(const Field& f, const Multiplier& m)
{
    require_same_grid(f.grid(), m.grid());
    return Field::from_spectrum(f.grid(), apply_multiplier(f.spectrum(), m));
}

// Common symbols.
namespace symbols {
inline cplx derivative(double k) { return cplx(0.0, k); }
inline cplx bessel(double k) { return 1.0 / (1.0 + k * k); } // (1 - d^2)^{-1}
} // namespace symbols

inline Multiplier derivative_multiplier(const PeriodicGrid& g, int order = 1)
{
    return Multiplier(
        g, [order](double k) { return std::pow(cplx(0.0, k), order); },
        order % 2 == 0 ? Parity::Even : Parity::Odd);
}

inline Multiplier bessel_multiplier(const PeriodicGrid& g)
{
    return Multiplier(g, symbols::bessel, Parity::Even);
}

// ---------------------------------------------------------------------------
// Norms and inner products.

// Discrete L2 norm of samples, (sum |u_n|^2 dx)^{1/2}.
inline double l2_norm(const PeriodicGrid& g, const CVec& samples)
{
    double s = 0.0;
    for (const auto& v : samples) s += std::norm(v);
    return std::sqrt(s * g.dx());
}

inline double l2_norm(const Field& f) { return l2_norm(f.grid(), f.samples()); }

// Spectral-side L2 norm; equal to l2_norm by Parseval (2pi from the convention).
inline double spectral_l2_norm(const PeriodicGrid& g, const CVec& spec)
{
    double s = 0.0;
    for (const auto& v : spec) s += std::norm(v);
    return std::sqrt(2.0 * kPi * s * g.dk());
}

// H^s norm, (2pi int |u^(k)|^2 (1+k^2)^s dk)^{1/2} by lattice quadrature; the 2pi
// makes s = 0 coincide with the L2 norm of the samples.
inline double sobolev_norm(const PeriodicGrid& g, const CVec& spec, double s)
{
    if (s < 0.0) throw std::invalid_argument("sobolev_norm: negative index");
    double acc = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double k = g.k(i);
        acc += std::norm(spec[i]) * std::pow(1.0 + k * k, s);
    }
    return std::sqrt(2.0 * kPi * acc * g.dk());
}

inline double sobolev_norm(const Field& f, double s) { return sobolev_norm(f.grid(), f.spectrum(), s); }

// Real inner product int f g dx of real fields given by samples.
inline double integrate_product(const PeriodicGrid& g, const RVec& a, const RVec& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * g.dx();
}

inline double integrate(const PeriodicGrid& g, const RVec& a)
{
    double s = 0.0;
    for (double v : a) s += v;
    return s * g.dx();
}

// ---------------------------------------------------------------------------
// Products.

// Embeds an N-spectrum into an M-spectrum (M > N) by zero padding. The
// Nyquist coefficient is split evenly over +-N/2 so real input stays real.
inline CVec pad_spectrum(const PeriodicGrid& g, const CVec& spec, std::size_t M)
{
    CVec out(M);
    const long m = static_cast<long>(M);
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const long j = g.mode(i);
        if (g.is_nyquist(i)) {
            out[static_cast<std::size_t>(-j)] = 0.5 * spec[i];
            out[static_cast<std::size_t>(j + m)] = 0.5 * spec[i];
            continue;
        }
        out[static_cast<std::size_t>(j >= 0 ? j : j + m)] = spec[i];
    }
    return out;
}

inline CVec truncate_spectrum(const PeriodicGrid& g, const CVec& big)
{
    const long m = static_cast<long>(big.size());
    CVec out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const long j = g.mode(i);
        if (g.is_nyquist(i)) {
            out[i] = big[static_cast<std::size_t>(-j)] + big[static_cast<std::size_t>(j + m)];
            continue;
        }
        out[i] = big[static_cast<std::size_t>(j >= 0 ? j : j + m)];
    }
    return out;
}

// Padded-grid samples of a spectrum (M points over the same cell).
inline CVec padded_samples(const PeriodicGrid& g, const CVec& spec, std::size_t M)
{
    CVec big = pad_spectrum(g, spec, M);
    CVec out(M);
    detail::idft(big.data(), out.data(), M);
    for (auto& v : out) v *= g.dk();
    return out;
}

// Spectrum (truncated to g) of padded-grid samples.
inline CVec spectrum_from_padded(const PeriodicGrid& g, const CVec& samples)
{
    const std::size_t M = samples.size();
    CVec big(M);
    detail::dft(samples.data(), big.data(), M);
    const double s = (g.length() / static_cast<double>(M)) / (2.0 * kPi);
    for (auto& v : big) v *= s;
    return truncate_spectrum(g, big);
}

inline std::size_t padded_size(const PeriodicGrid& g) { return 3 * g.size() / 2; }

// Spectrum of the pointwise product, via 3/2 zero padding: exact for every
// non-Nyquist output mode; the Nyquist mode stays real for real input.
inline CVec convolve(const PeriodicGrid& g, const CVec& a, const CVec& b)
{
    const std::size_t M = padded_size(g);
    CVec pa = padded_samples(g, a, M);
    CVec pb = padded_samples(g, b, M);
    for (std::size_t i = 0; i < M; ++i) pa[i] *= pb[i];
    return spectrum_from_padded(g, pa);
}

inline Field convolve(const Field& a, const Field& b)
{
    require_same_grid(a.grid(), b.grid());
    return Field::from_spectrum(a.grid(), convolve(a.grid(), a.spectrum(), b.spectrum()));
}

// Highest retained mode number of the 2/3 rule.
inline long dealias_cutoff(const PeriodicGrid& g)
{
    return static_cast<long>(std::floor(2.0 / 3.0 * static_cast<double>(g.size() / 2)));
}

// 2/3-rule truncation; idempotent.
inline CVec dealias(const PeriodicGrid& g, const CVec& spec)
{
    CVec out = spec;
    const long kc = dealias_cutoff(g);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (std::labs(g.mode(i)) > kc) out[i] = 0.0;
    return out;
}

inline Field dealias(const Field& f) { return Field::from_spectrum(f.grid(), dealias(f.grid(), f.spectrum())); }

// Max |u^(-k) - conj u^(k)| relative to max |u^|, ignoring the Nyquist slot.
inline double hermitian_defect(const PeriodicGrid& g, const CVec& spec)
{
    double d = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) mx = std::max(mx, std::abs(spec[i]));
    for (std::size_t i = 1; i < spec.size(); ++i) {
        if (g.is_nyquist(i)) continue;
        d = std::max(d, std::abs(spec[g.size() - i] - std::conj(spec[i])));
    }
    return mx > 0.0 ? d / mx : 0.0;
}

// Projects a spectrum onto the spectra of real fields.
inline void make_hermitian(const PeriodicGrid& g, CVec& spec)
{
    spec[0] = spec[0].real();
    spec[g.nyquist_slot()] = spec[g.nyquist_slot()].real();
    for (std::size_t i = 1; i < g.size() / 2; ++i) {
        const cplx a = 0.5 * (spec[i] + std::conj(spec[g.size() - i]));
        spec[i] = a;
        spec[g.size() - i] = std::conj(a);
    }
}

} // namespace nlslab
