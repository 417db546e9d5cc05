#include "kstar/trace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kstar {

namespace {

double to_double(const Rational& q) { return q.convert_to<double>(); }

// int_0^1 x^a (1-x)^b dx by tanh-sinh.  The substitution
// x = 1/(1 + e^{-pi sinh t}) gives dx/dt = pi cosh(t) x (1-x), so each term
// is pi cosh(t) x^{a+1} (1-x)^{b+1} with both endpoint factors computed
// without cancellation.  Handles every b > -1, including the endpoint
// singularities the model range produces.
double beta_tanh_sinh(long a, double b) {
    const double pi = std::numbers::pi;
    auto term = [&](double t) {
        double wv = 0.5 * pi * std::sinh(t);
        double x = 1.0 / (1.0 + std::exp(-2.0 * wv));
        double omx = 1.0 / (1.0 + std::exp(2.0 * wv));
        return pi * std::cosh(t) * std::pow(x, static_cast<double>(a) + 1.0) *
               std::pow(omx, b + 1.0);
    };
    const double tmax = 6.5;
    double h = 1.0;
    double total = term(0.0);
    for (double t = h; t <= tmax; t += h) total += term(t) + term(-t);
    double integral = h * total;
    for (int level = 1; level <= 12; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double t = h; t <= tmax; t += 2.0 * h) add += term(t) + term(-t);
        double next = 0.5 * integral + h * add;
        bool settled = std::abs(next - integral) <= 1e-14 * std::max(1.0, std::abs(next));
        integral = next;
        if (settled && level >= 5) break;
    }
    return integral;
}

// int_0^1 x^a (1-x)^b dx; Gauss-Legendre when the integrand is a
// polynomial, tanh-sinh otherwise.
double beta_quad(long a, double b, int npts) {
    double bint = 0.0;
    if (b >= 0.0 && std::modf(b, &bint) == 0.0) {
        long deg = a + static_cast<long>(bint);
        int n = std::max(npts, static_cast<int>(deg / 2) + 2);
        auto rule = QuadratureRule::gauss_legendre01(n);
        return rule.integrate([&](double u) {
            return std::pow(u, static_cast<double>(a)) * std::pow(1.0 - u, b);
        });
    }
    return beta_tanh_sinh(a, b);
}

void check_pair(const MultiIndex& m, const MultiIndex& n) {
    if (m.dim() != n.dim()) throw StructuralError("quadrature trace: index dimensions differ");
    if (m.dim() == 0) throw StructuralError("quadrature trace: empty index");
}

}  // namespace

double PiRational::value() const {
    return to_double(q) * std::pow(std::numbers::pi, pi_pow);
}

std::string PiRational::str() const {
    std::string s = to_pq_string(q);
    if (pi_pow != 0 && q != 0) s += " * pi^" + std::to_string(pi_pow);
    return s;
}

PiRational PiRational::operator+(const PiRational& o) const {
    if (q == 0) return o;
    if (o.q == 0) return *this;
    if (pi_pow != o.pi_pow)
        throw StructuralError("PiRational: sum of unlike pi powers is not rational");
    return {q + o.q, pi_pow};
}

PiRational chn_c0(const Rational& hbar, int dim) {
    if (dim <= 0) throw StructuralError("chn_c0: dimension must be positive");
    if (hbar <= 0) throw DomainError("chn_c0: hbar must be positive");
    Rational s = Rational(1) / hbar;
    if (s <= dim) throw DomainError("chn_c0: trace diverges unless 1/hbar > dim");
    // Gamma(s - N) / Gamma(s) = 1 / ((s-N)(s-N+1)...(s-1))
    return {Rational(1) / gamma_ratio_rising(s - dim, dim), dim};
}

TraceSpec TraceSpec::chn_integral(const Rational& hbar, int dim) {
    return {chn_c0(hbar, dim), Model::CHn};
}

PiRational sp_trace(const FockMatrix& A, const TraceSpec& spec) {
    Rational acc = 0;
    for (const auto& [key, c] : A.a)
        if (key.first == key.second) acc += c * key.first.fact();
    return spec.c_p * acc;
}

PiRational cyclicity_check(const FockContext& ctx, const FockMatrix& A, const FockMatrix& B,
                           const TraceSpec& spec) {
    return sp_trace(fock_mul(ctx, A, B), spec) - sp_trace(fock_mul(ctx, B, A), spec);
}

double QuadratureRule::integrate(const std::function<double(double)>& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * f(x[i]);
    return acc;
}

QuadratureRule QuadratureRule::gauss_laguerre(int npts) {
    if (npts < 1 || npts > 180) throw StructuralError("gauss_laguerre: node count out of range");
    QuadratureRule r{Domain::HalfLineExpWeight, std::vector<double>(npts),
                     std::vector<double>(npts)};
    int n = npts;
    for (int i = 0; i < n; ++i) {
        double z;
        if (i == 0)
            z = 3.0 / (1.0 + 2.4 * n);
        else if (i == 1)
            z = r.x[0] + 15.0 / (1.0 + 2.5 * n);
        else
            z = r.x[i - 1] + ((1.0 + 2.55 * (i - 1)) / (1.9 * (i - 1))) * (r.x[i - 1] - r.x[i - 2]);
        double pp = 0.0, p2 = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
            double p1 = 1.0;
            p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0 - z) * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (p1 - p2) / z;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        r.x[i] = z;
        r.w[i] = -1.0 / (pp * n * p2);
    }
    // moment self-check: int_0^inf t^k e^{-t} dt = k!
    double fact = 1.0;
    for (int k = 0; k <= std::min(r.exact_degree(), 18); ++k) {
        if (k > 0) fact *= k;
        double got = r.integrate([&](double t) { return std::pow(t, k); });
        if (std::abs(got - fact) > 1e-9 * fact)
            throw InternalError("gauss_laguerre: moment self-check failed");
    }
    return r;
}

QuadratureRule QuadratureRule::gauss_legendre01(int npts) {
    if (npts < 1 || npts > 300) throw StructuralError("gauss_legendre01: node count out of range");
    QuadratureRule r{Domain::UnitInterval, std::vector<double>(npts), std::vector<double>(npts)};
    const double pi = std::numbers::pi;
    int n = npts;
    int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15) break;
        }
        // map [-1, 1] -> [0, 1]; nodes come in symmetric pairs
        r.x[i] = 0.5 * (1.0 - z);
        r.x[n - 1 - i] = 0.5 * (1.0 + z);
        double wv = 1.0 / ((1.0 - z * z) * pp * pp);  // full weight 2/... times map factor 1/2
        r.w[i] = wv;
        r.w[n - 1 - i] = wv;
    }
    // moment self-check: int_0^1 u^k du = 1/(k+1)
    for (int k = 0; k <= std::min(r.exact_degree(), 20); ++k) {
        double got = r.integrate([&](double u) { return std::pow(u, k); });
        if (std::abs(got - 1.0 / (k + 1)) > 1e-12)
            throw InternalError("gauss_legendre01: moment self-check failed");
    }
    return r;
}

double quad_trace_Cn(const MultiIndex& m, const MultiIndex& n, const Rational& hbar, int npts) {
    check_pair(m, n);
    if (hbar <= 0) throw DomainError("quad_trace_Cn: hbar must be positive");
    // the angular integral of z^{m_i} zbar^{n_i} over a circle vanishes
    // unless m_i = n_i, so the off-diagonal trace is exactly zero
    if (m != n) return 0.0;
    // per factor: (1/(pi hbar)) int |z|^{2k} e^{-|z|^2/hbar} dA
    //           = (1/(pi hbar)) * pi * hbar^{k+1} int t^k e^{-t} dt  (u = r^2 = hbar t),
    // and the basis normalization divides by hbar^k k!, so the pi and hbar
    // powers cancel identically; the quadrature carries int t^k e^{-t} dt.
    double v = 1.0;
    for (int i = 0; i < m.dim(); ++i) {
        int k = n[i];
        auto rule = QuadratureRule::gauss_laguerre(std::max(npts, k / 2 + 4));
        double radial = rule.integrate([&](double t) { return std::pow(t, k); });
        v *= radial / to_double(factorial(k));
    }
    return v;
}

double quad_trace_CHn(const MultiIndex& m, const MultiIndex& n, const Rational& hbar, int npts) {
    check_pair(m, n);
    if (hbar <= 0) throw DomainError("quad_trace_CHn: hbar must be positive");
    int N = m.dim();
    Rational s = Rational(1) / hbar;
    if (s <= N) throw DomainError("quad_trace_CHn: trace diverges unless 1/hbar > dim");
    if (m != n) return 0.0;
    // normalized basis function: (rising(s,|n|)/n!) z^n zbar^n (1-|z|^2)^s;
    // against mu_g the radial profile is r^{2n} (1-|z|^2)^{s-N-1}.  Angular
    // factors give pi^N exactly; the simplex integral over u_i = r_i^2
    // splits by the Duffy substitution into a chain of Beta integrals, only
    // the last of which carries the possibly non-integer exponent.
    double coef = to_double(gamma_ratio_rising(s, n.total()) / n.fact());
    double simplex = 1.0;
    long acc = 0;
    for (int k = 1; k < N; ++k) {
        simplex *= beta_quad(acc + n[k - 1] + (k - 1), static_cast<double>(n[k]), npts);
        acc += n[k - 1];
    }
    double c = to_double(s) - N - 1;
    simplex *= beta_quad(n.total() + N - 1, c, npts);
    return coef * std::pow(std::numbers::pi, N) * simplex;
}

}  // namespace kstar
