#include "agan/losses.hpp"

#include <cmath>

#include "agan/errors.hpp"

namespace agan {

namespace {

void require_nonempty(std::span<const double> s, const char* who) {
    if (s.empty()) throw ShapeError(std::string(who) + ": empty score sequence");
}

double mean_sq_minus_one(std::span<const double> s) {
    double acc = 0.0;
    for (double v : s) acc += (v - 1.0) * (v - 1.0);
    return acc / static_cast<double>(s.size());
}

}  // namespace

LossValue log_mag_loss(std::span<const double> x, std::span<const double> x_prime,
                       const SpectralConfig& cfg) {
    return log_mag_loss_grad(x, x_prime, cfg, nullptr);
}

LossValue log_mag_loss_grad(std::span<const double> x, std::span<const double> x_prime,
                            const SpectralConfig& cfg, std::vector<double>* gxp) {
    if (x.size() != x_prime.size())
        throw ShapeError("log_mag_loss: waveform length mismatch (" + std::to_string(x.size()) +
                         " vs " + std::to_string(x_prime.size()) + ")");
    const ComplexSpectrogram sa = stft(x, cfg);
    const ComplexSpectrogram sb = stft(x_prime, cfg);
    const int frames = sa.frames();
    const int bins = sa.bins();
    const double count = static_cast<double>(frames) * bins;

    double acc = 0.0;
    std::vector<std::vector<std::complex<double>>> gspec;
    if (gxp) gspec.assign(static_cast<std::size_t>(frames),
                          std::vector<std::complex<double>>(static_cast<std::size_t>(bins)));

    for (int f = 0; f < frames; ++f) {
        for (int b = 0; b < bins; ++b) {
            const double ma = std::abs(sa.values[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)]);
            const std::complex<double> cb =
                sb.values[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)];
            const double mb = std::abs(cb);
            const double diff = std::log(mb + cfg.eps) - std::log(ma + cfg.eps);
            acc += std::abs(diff);
            if (gxp) {
                // d|diff|/d mb = sign(diff) / (mb + eps); d mb/d re = re/mb
                double scale = 0.0;
                if (diff > 0.0)
                    scale = 1.0;
                else if (diff < 0.0)
                    scale = -1.0;
                scale /= count * (mb + cfg.eps);
                if (mb > 0.0)
                    gspec[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)] =
                        std::complex<double>(scale * cb.real() / mb, scale * cb.imag() / mb);
            }
        }
    }

    if (gxp) {
        gxp->assign(x_prime.size(), 0.0);
        stft_adjoint(gspec, cfg, std::span<double>(*gxp));
    }

    LossValue lv;
    lv.value = acc / count;
    lv.breakdown["log_mag"] = lv.value;
    return lv;
}

LossValue lsgan_d_loss(std::span<const double> scores_real, std::span<const double> scores_fake) {
    require_nonempty(scores_real, "lsgan_d_loss");
    require_nonempty(scores_fake, "lsgan_d_loss");
    double fake = 0.0;
    for (double v : scores_fake) fake += v * v;
    LossValue lv;
    lv.breakdown["real"] = 0.5 * mean_sq_minus_one(scores_real);
    lv.breakdown["fake"] = 0.5 * fake / static_cast<double>(scores_fake.size());
    lv.value = lv.breakdown["real"] + lv.breakdown["fake"];
    return lv;
}

void lsgan_d_loss_grad(std::span<const double> scores_real, std::span<const double> scores_fake,
                       std::vector<double>* g_real, std::vector<double>* g_fake) {
    require_nonempty(scores_real, "lsgan_d_loss_grad");
    require_nonempty(scores_fake, "lsgan_d_loss_grad");
    if (g_real) {
        g_real->resize(scores_real.size());
        const double n = static_cast<double>(scores_real.size());
        for (std::size_t i = 0; i < scores_real.size(); ++i)
            (*g_real)[i] = (scores_real[i] - 1.0) / n;
    }
    if (g_fake) {
        g_fake->resize(scores_fake.size());
        const double n = static_cast<double>(scores_fake.size());
        for (std::size_t i = 0; i < scores_fake.size(); ++i) (*g_fake)[i] = scores_fake[i] / n;
    }
}

LossValue lsgan_g_loss(std::span<const double> scores_fake) {
    require_nonempty(scores_fake, "lsgan_g_loss");
    LossValue lv;
    lv.value = 0.5 * mean_sq_minus_one(scores_fake);
    lv.breakdown["adversarial"] = lv.value;
    return lv;
}

void lsgan_g_loss_grad(std::span<const double> scores_fake, std::vector<double>* g_fake) {
    require_nonempty(scores_fake, "lsgan_g_loss_grad");
    g_fake->resize(scores_fake.size());
    const double n = static_cast<double>(scores_fake.size());
    for (std::size_t i = 0; i < scores_fake.size(); ++i)
        (*g_fake)[i] = (scores_fake[i] - 1.0) / n;
}

LossValue agan_g_loss(std::span<const double> x_prime, std::span<const double> x,
                      std::span<const double> scores_fake, double lambda,
                      const SpectralConfig& cfg) {
    return agan_g_loss_grad(x_prime, x, scores_fake, lambda, cfg, nullptr, nullptr);
}

LossValue agan_g_loss_grad(std::span<const double> x_prime, std::span<const double> x,
                           std::span<const double> scores_fake, double lambda,
                           const SpectralConfig& cfg, std::vector<double>* gxp,
                           std::vector<double>* g_scores) {
    if (lambda < 0.0) throw DomainError("agan_g_loss: lambda must be >= 0");
    require_nonempty(scores_fake, "agan_g_loss");
    const LossValue spectral = log_mag_loss_grad(x, x_prime, cfg, gxp);

    LossValue lv;
    lv.breakdown["spectral"] = spectral.value;
    lv.breakdown["adversarial"] = 0.5 * lambda * mean_sq_minus_one(scores_fake);
    lv.value = lv.breakdown["spectral"] + lv.breakdown["adversarial"];
    if (g_scores) {
        g_scores->resize(scores_fake.size());
        const double n = static_cast<double>(scores_fake.size());
        for (std::size_t i = 0; i < scores_fake.size(); ++i)
            (*g_scores)[i] = lambda * (scores_fake[i] - 1.0) / n;
    }
    return lv;
}

double cgan_value(std::span<const double> d_real, std::span<const double> d_fake) {
    require_nonempty(d_real, "cgan_value");
    require_nonempty(d_fake, "cgan_value");
    double a = 0.0, b = 0.0;
    for (double v : d_real) {
        if (v <= 0.0 || v >= 1.0) throw DomainError("cgan_value: d_real outside (0,1)");
        a += std::log(v);
    }
    for (double v : d_fake) {
        if (v <= 0.0 || v >= 1.0) throw DomainError("cgan_value: d_fake outside (0,1)");
        b += std::log(1.0 - v);
    }
    return a / static_cast<double>(d_real.size()) + b / static_cast<double>(d_fake.size());
}

void cgan_value_grad(std::span<const double> d_real, std::span<const double> d_fake,
                     std::vector<double>* g_real, std::vector<double>* g_fake) {
    cgan_value(d_real, d_fake);  // domain checks
    if (g_real) {
        g_real->resize(d_real.size());
        const double n = static_cast<double>(d_real.size());
        for (std::size_t i = 0; i < d_real.size(); ++i) (*g_real)[i] = 1.0 / (n * d_real[i]);
    }
    if (g_fake) {
        g_fake->resize(d_fake.size());
        const double n = static_cast<double>(d_fake.size());
        for (std::size_t i = 0; i < d_fake.size(); ++i)
            (*g_fake)[i] = -1.0 / (n * (1.0 - d_fake[i]));
    }
}

LossValue segan_g_loss(std::span<const double> x_prime, std::span<const double> x,
                       std::span<const double> scores_fake, double lambda) {
    return segan_g_loss_grad(x_prime, x, scores_fake, lambda, nullptr, nullptr);
}

LossValue segan_g_loss_grad(std::span<const double> x_prime, std::span<const double> x,
                            std::span<const double> scores_fake, double lambda,
                            std::vector<double>* gxp, std::vector<double>* g_scores) {
    if (x.size() != x_prime.size()) throw ShapeError("segan_g_loss: waveform length mismatch");
    if (x.empty()) throw ShapeError("segan_g_loss: empty waveforms");
    require_nonempty(scores_fake, "segan_g_loss");

    double l1 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) l1 += std::abs(x_prime[i] - x[i]);
    l1 /= static_cast<double>(x.size());

    LossValue lv;
    lv.breakdown["l1"] = lambda * l1;
    lv.breakdown["adversarial"] = 0.5 * mean_sq_minus_one(scores_fake);
    lv.value = lv.breakdown["l1"] + lv.breakdown["adversarial"];

    if (gxp) {
        gxp->resize(x.size());
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x_prime[i] - x[i];
            (*gxp)[i] = lambda * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / n;
        }
    }
    if (g_scores) {
        g_scores->resize(scores_fake.size());
        const double n = static_cast<double>(scores_fake.size());
        for (std::size_t i = 0; i < scores_fake.size(); ++i)
            (*g_scores)[i] = (scores_fake[i] - 1.0) / n;
    }
    return lv;
}

}  // namespace agan
