#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "agan/spectral.hpp"

namespace agan {

// Scalar objective with named sub-terms; value always equals the sum of the
// breakdown entries.
struct LossValue {
    double value = 0.0;
    std::map<std::string, double> breakdown;
};

// L1 distance between log-compressed STFT magnitudes, averaged over all
// (frame, bin) elements. Symmetric in its arguments.
LossValue log_mag_loss(std::span<const double> x, std::span<const double> x_prime,
                       const SpectralConfig& cfg);

// Same value; also accumulates d(loss)/d(x_prime) into gxp (resized to
// x_prime's length).
LossValue log_mag_loss_grad(std::span<const double> x, std::span<const double> x_prime,
                            const SpectralConfig& cfg, std::vector<double>* gxp);

// 1/2 mean((s_real - 1)^2) + 1/2 mean(s_fake^2)
LossValue lsgan_d_loss(std::span<const double> scores_real, std::span<const double> scores_fake);
void lsgan_d_loss_grad(std::span<const double> scores_real, std::span<const double> scores_fake,
                       std::vector<double>* g_real, std::vector<double>* g_fake);

// 1/2 mean((s_fake - 1)^2)
LossValue lsgan_g_loss(std::span<const double> scores_fake);
void lsgan_g_loss_grad(std::span<const double> scores_fake, std::vector<double>* g_fake);

// log-mag term plus lambda-weighted least-squares adversarial term:
// log_mag_loss(x', x) + (lambda/2) mean((s_fake - 1)^2)
LossValue agan_g_loss(std::span<const double> x_prime, std::span<const double> x,
                      std::span<const double> scores_fake, double lambda,
                      const SpectralConfig& cfg);
// Spectral gradient goes to gxp; adversarial gradient to g_scores. The path
// from scores back to x' runs through the discriminator and is composed by
// the caller.
LossValue agan_g_loss_grad(std::span<const double> x_prime, std::span<const double> x,
                           std::span<const double> scores_fake, double lambda,
                           const SpectralConfig& cfg, std::vector<double>* gxp,
                           std::vector<double>* g_scores);

// mean(log d_real) + mean(log(1 - d_fake)); probabilities strictly inside
// (0,1). Reference value for tests and docs, not used in training.
double cgan_value(std::span<const double> d_real, std::span<const double> d_fake);
void cgan_value_grad(std::span<const double> d_real, std::span<const double> d_fake,
                     std::vector<double>* g_real, std::vector<double>* g_fake);

// lambda * mean|x' - x| + 1/2 mean((s_fake - 1)^2); the time-domain L1
// alternative kept as a documented reference.
LossValue segan_g_loss(std::span<const double> x_prime, std::span<const double> x,
                       std::span<const double> scores_fake, double lambda);
LossValue segan_g_loss_grad(std::span<const double> x_prime, std::span<const double> x,
                            std::span<const double> scores_fake, double lambda,
                            std::vector<double>* gxp, std::vector<double>* g_scores);

}  // namespace agan
