#pragma once

#include <Eigen/Dense>

#include "foilgen/random.hpp"

namespace foilgen::vae {

using Vector = Eigen::VectorXd;

// log I_nu(x) for nu >= 0, x > 0 without overflow up to x ~ 1e5.
double log_bessel_i(double nu, double x);
// I_{m/2}(k) / I_{m/2-1}(k), the mean resultant length of vMF on S^{m-1}.
double vmf_mean_resultant(double kappa, int m);

struct GaussLatent {
    Vector mu;
    Vector sigma;
};

struct SphereLatent {
    Vector mu;  // unit vector in R^{d+1}
    double kappa = 0.0;
};

// Smallest standard deviation used anywhere; sample_gauss clamps to it.
inline constexpr double kSigmaFloor = 1e-8;

Vector sample_gauss(const GaussLatent& lat, Rng& rng);

// Randomness behind one vMF draw, kept separately so the same draw can be
// replayed through the deterministic transform (for gradients and for
// finite-difference checks with common random numbers).
struct VmfNoise {
    double eps = 0.5;  // accepted Beta((m-1)/2, (m-1)/2) variate
    Vector tangent;    // unit vector in R^{m-1}
};

inline constexpr int kMaxVmfProposals = 1000;

// Wood's rejection sampler for the cosine to the mean direction.
VmfNoise draw_vmf_noise(double kappa, int m, Rng& rng);
// Cosine w(eps, kappa) and its derivative in kappa at fixed eps.
double vmf_cosine(double kappa, int m, double eps, double* dw_dkappa = nullptr);
// Point on the sphere: cosine w along mu, the rest along the tangent, rotated
// from the first axis to mu by a Householder reflection.
Vector vmf_transform(const Vector& mu, double kappa, const VmfNoise& noise);
// Pullback of d loss / d z through vmf_transform.
void vmf_transform_grad(const Vector& mu, double kappa, const VmfNoise& noise, const Vector& dz, Vector& dmu,
                        double& dkappa);
Vector sample_vmf(const SphereLatent& lat, Rng& rng);

double kl_gauss(const GaussLatent& lat);
// KL(vMF(mu, kappa) || uniform on S^d). Depends on kappa and d only.
double kl_vmf(double kappa, int d);
double kl_vmf_dkappa(double kappa, int d);

}  // namespace foilgen::vae
