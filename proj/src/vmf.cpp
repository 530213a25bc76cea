#include "foilgen/vmf.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "foilgen/error.hpp"

namespace foilgen::vae {

namespace {

constexpr double kLog2 = std::numbers::ln2;
constexpr double kLogPi = 1.1447298858494002;  // log(pi)

// Power series, all terms positive, fine for moderate x.
double log_bessel_series(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (k * (nu + k));
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + std::log(sum);
}

// Hankel expansion; terms shrink quickly once 8x >> 4 nu^2.
double log_bessel_asymptotic(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = -term * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

// log sinh x for x > 0.
double log_sinh(double x) {
    if (x > 20.0) return x - kLog2 + std::log1p(-std::exp(-2.0 * x));
    return std::log(std::sinh(x));
}

double wood_b(double kappa, int m) {
    const double mm1 = m - 1.0;
    return mm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + mm1 * mm1));
}

}  // namespace

double log_bessel_i(double nu, double x) {
    if (!(nu >= 0.0)) throw ParameterError("log_bessel_i: order must be non-negative");
    if (!(x >= 0.0)) throw ParameterError("log_bessel_i: argument must be non-negative");
    if (x == 0.0) return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (x < 1.0) return log_bessel_series(nu, x);
    if (nu == 0.5) return 0.5 * (kLog2 - kLogPi - std::log(x)) + log_sinh(x);
    if (nu == 1.5) {
        // cosh x - sinh x / x = e^x / 2 * (1 - 1/x + e^{-2x} (1 + 1/x))
        const double e2 = std::exp(-2.0 * x);
        return 0.5 * (kLog2 - kLogPi - std::log(x)) + x - kLog2 + std::log(1.0 - 1.0 / x + e2 * (1.0 + 1.0 / x));
    }
    if (x <= 20.0) return log_bessel_series(nu, x);
    if (x <= 700.0) return std::log(boost::math::cyl_bessel_i(nu, x));
    return log_bessel_asymptotic(nu, x);
}

double vmf_mean_resultant(double kappa, int m) {
    if (m < 2) throw ParameterError("vMF needs a sphere of dimension >= 1");
    if (!(kappa >= 0.0)) throw ParameterError("vMF concentration must be non-negative");
    if (kappa == 0.0) return 0.0;
    if (m == 3) {
        if (kappa < 1e-3) {
            const double k2 = kappa * kappa;
            return kappa / 3.0 - kappa * k2 / 45.0 + 2.0 * kappa * k2 * k2 / 945.0;
        }
        const double coth = kappa > 20.0 ? 1.0 + 2.0 * std::exp(-2.0 * kappa) : 1.0 / std::tanh(kappa);
        return coth - 1.0 / kappa;
    }
    const double nu = 0.5 * m - 1.0;
    return std::exp(log_bessel_i(nu + 1.0, kappa) - log_bessel_i(nu, kappa));
}

Vector sample_gauss(const GaussLatent& lat, Rng& rng) {
    Vector z(lat.mu.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = lat.mu(i) + std::max(lat.sigma(i), kSigmaFloor) * rng.normal();
    return z;
}

VmfNoise draw_vmf_noise(double kappa, int m, Rng& rng) {
    if (m < 2) throw ParameterError("vMF needs a sphere of dimension >= 1");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw SamplingError("vMF concentration must be finite and >= 0");
    const double mm1 = m - 1.0;
    const double b = wood_b(kappa, m);
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + mm1 * std::log(4.0 * b / ((1.0 + b) * (1.0 + b)));

    VmfNoise noise;
    bool accepted = false;
    for (int i = 0; i < kMaxVmfProposals && !accepted; ++i) {
        const double eps = rng.beta(0.5 * mm1, 0.5 * mm1);
        const double w = (1.0 - (1.0 + b) * eps) / (1.0 - (1.0 - b) * eps);
        const double u = rng.uniform_open0();
        if (kappa * w + mm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
            noise.eps = eps;
            accepted = true;
        }
    }
    if (!accepted) {
        throw SamplingError("vMF rejection sampler exceeded " + std::to_string(kMaxVmfProposals) +
                            " proposals (kappa = " + std::to_string(kappa) + ")");
    }
    noise.tangent.resize(m - 1);
    double norm = 0.0;
    do {
        for (Eigen::Index i = 0; i < noise.tangent.size(); ++i) noise.tangent(i) = rng.normal();
        norm = noise.tangent.norm();
    } while (norm == 0.0);
    noise.tangent /= norm;
    return noise;
}

double vmf_cosine(double kappa, int m, double eps, double* dw_dkappa) {
    const double b = wood_b(kappa, m);
    const double den = 1.0 - (1.0 - b) * eps;
    const double w = (1.0 - (1.0 + b) * eps) / den;
    if (dw_dkappa) {
        const double mm1 = m - 1.0;
        const double s = std::sqrt(4.0 * kappa * kappa + mm1 * mm1);
        const double db = -mm1 * (2.0 + 4.0 * kappa / s) / ((2.0 * kappa + s) * (2.0 * kappa + s));
        *dw_dkappa = -2.0 * eps * (1.0 - eps) / (den * den) * db;
    }
    return std::clamp(w, -1.0, 1.0);
}

namespace {

struct Householder {
    Vector a;  // e1 - mu
    double q = 0.0;
    bool identity = true;

    explicit Householder(const Vector& mu) : a(-mu) {
        a(0) += 1.0;
        q = a.squaredNorm();
        identity = q < 1e-30;
    }
    Vector apply(const Vector& v) const { return identity ? v : Vector(v - (2.0 / q) * a * a.dot(v)); }
};

Vector pre_rotation(double w, const VmfNoise& noise) {
    Vector zp(noise.tangent.size() + 1);
    zp(0) = w;
    zp.tail(noise.tangent.size()) = std::sqrt(std::max(0.0, 1.0 - w * w)) * noise.tangent;
    return zp;
}

}  // namespace

Vector vmf_transform(const Vector& mu, double kappa, const VmfNoise& noise) {
    if (noise.tangent.size() + 1 != mu.size()) throw ParameterError("vMF noise does not match the sphere dimension");
    const double w = vmf_cosine(kappa, static_cast<int>(mu.size()), noise.eps);
    return Householder(mu).apply(pre_rotation(w, noise));
}

void vmf_transform_grad(const Vector& mu, double kappa, const VmfNoise& noise, const Vector& dz, Vector& dmu,
                        double& dkappa) {
    const int m = static_cast<int>(mu.size());
    double dw_dk = 0.0;
    const double w = vmf_cosine(kappa, m, noise.eps, &dw_dk);
    const Vector zp = pre_rotation(w, noise);
    const Householder h(mu);

    dmu = Vector::Zero(m);
    if (!h.identity) {
        const double az = h.a.dot(zp), ag = h.a.dot(dz);
        const Vector da = -(2.0 / h.q) * (dz * az + zp * ag) + (4.0 / (h.q * h.q)) * h.a * (ag * az);
        dmu = -da;
    }
    const Vector gp = h.apply(dz);  // reflection is symmetric
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    double dw = gp(0);
    if (s > 1e-12) dw -= (w / s) * gp.tail(m - 1).dot(noise.tangent);
    dkappa = dw * dw_dk;
}

Vector sample_vmf(const SphereLatent& lat, Rng& rng) {
    const VmfNoise noise = draw_vmf_noise(lat.kappa, static_cast<int>(lat.mu.size()), rng);
    return vmf_transform(lat.mu, lat.kappa, noise);
}

double kl_gauss(const GaussLatent& lat) {
    double kl = 0.0;
    for (Eigen::Index i = 0; i < lat.mu.size(); ++i) {
        const double s = std::max(lat.sigma(i), kSigmaFloor);
        kl += 0.5 * (lat.mu(i) * lat.mu(i) + s * s - 1.0 - 2.0 * std::log(s));
    }
    return kl;
}

double kl_vmf(double kappa, int d) {
    if (d < 1) throw ParameterError("kl_vmf: latent dimension must be >= 1");
    if (!(kappa >= 0.0)) throw ParameterError("kl_vmf: concentration must be non-negative");
    if (kappa == 0.0) return 0.0;
    const double h = 0.5 * (d + 1);  // (d+1)/2
    const double kl = kappa * vmf_mean_resultant(kappa, d + 1) + (h - 1.0) * std::log(kappa) -
                      h * std::log(2.0 * std::numbers::pi) - log_bessel_i(h - 1.0, kappa) + h * kLogPi + kLog2 -
                      std::lgamma(h);
    return std::max(kl, 0.0);
}

double kl_vmf_dkappa(double kappa, int d) {
    if (d < 1) throw ParameterError("kl_vmf: latent dimension must be >= 1");
    const double a = vmf_mean_resultant(kappa, d + 1);
    return kappa * (1.0 - a * a) - d * a;
}

}  // namespace foilgen::vae
