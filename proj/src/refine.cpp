#include <algorithm>
#include <cmath>
#include <vector>

#include "vff/error.hpp"
#include "vff/fit.hpp"
#include "vff/sampler.hpp"

namespace vff {

void RefineConfig::validate() const
{
    if (iterations < 0) {
        throw ConfigError("refine iterations must be >= 0");
    }
    if (!(step > 0.0) || !(fd_epsilon > 0.0)) {
        throw ConfigError("refine step and fd_epsilon must be positive");
    }
    if (!(holdout_fraction >= 0.0) || holdout_fraction >= 1.0) {
        throw ConfigError("holdout fraction must lie in [0, 1)");
    }
}

double reconstruction_error(std::span<const VideoBuffer> clips, const FrequencyBank& bank, const FitConfig& fit_cfg)
{
    if (clips.empty()) {
        throw ConfigError("reconstruction error needs at least one clip");
    }
    double total = 0.0;
    for (const VideoBuffer& clip : clips) {
        const FieldGrid64 grid = fit_video<double>(clip, bank, fit_cfg);
        const VideoBuffer rec = sample_grid(grid, SampleSpec::make(clip.dims(), 1.0, 1.0), PsfSpec::point(),
                                            {fit_cfg.threads, {}});
        double sse = 0.0;
        for (std::size_t k = 0; k < rec.data().size(); ++k) {
            const double e = rec.data()[k] - clip.data()[k];
            sse += e * e;
        }
        total += sse / static_cast<double>(rec.data().size());
    }
    return total / static_cast<double>(clips.size());
}

namespace {

double& component(std::vector<Vec3>& omegas, std::size_t flat)
{
    Vec3& w = omegas[flat / 3];
    return flat % 3 == 0 ? w.x : (flat % 3 == 1 ? w.y : w.t);
}

} // namespace

FrequencyBank refine_bank(std::span<const VideoBuffer> corpus, const FrequencyBank& bank, const FitConfig& fit_cfg,
                          const RefineConfig& refine_cfg)
{
    refine_cfg.validate();
    fit_cfg.validate();
    if (corpus.empty()) {
        throw ConfigError("refinement corpus is empty");
    }
    const std::size_t n = corpus.size();
    std::size_t n_hold = static_cast<std::size_t>(std::ceil(refine_cfg.holdout_fraction * static_cast<double>(n)));
    n_hold = n == 1 ? 0 : std::clamp<std::size_t>(n_hold, 1, n - 1);
    const auto train = corpus.first(n - n_hold);
    const auto holdout = n_hold == 0 ? corpus : corpus.last(n_hold);

    const auto loss_of = [&](std::span<const VideoBuffer> clips, const std::vector<Vec3>& omegas) {
        return reconstruction_error(clips, FrequencyBank(omegas, bank.dc_index()), fit_cfg);
    };

    std::vector<Vec3> current(bank.omegas().begin(), bank.omegas().end());
    FrequencyBank best = bank;
    double best_holdout = reconstruction_error(holdout, bank, fit_cfg);
    double train_loss = reconstruction_error(train, bank, fit_cfg);
    double step = refine_cfg.step;

    for (int it = 0; it < refine_cfg.iterations; ++it) {
        std::vector<double> grad(current.size() * 3, 0.0);
        double norm_sq = 0.0;
        for (std::size_t flat = 0; flat < grad.size(); ++flat) {
            if (flat / 3 == bank.dc_index()) {
                continue;
            }
            std::vector<Vec3> plus = current;
            std::vector<Vec3> minus = current;
            component(plus, flat) += refine_cfg.fd_epsilon;
            component(minus, flat) -= refine_cfg.fd_epsilon;
            grad[flat] = (loss_of(train, plus) - loss_of(train, minus)) / (2.0 * refine_cfg.fd_epsilon);
            norm_sq += grad[flat] * grad[flat];
        }
        if (!(norm_sq > 0.0)) {
            break;
        }
        const double scale = step / std::sqrt(norm_sq);
        std::vector<Vec3> proposal = current;
        for (std::size_t flat = 0; flat < grad.size(); ++flat) {
            // float32-representable, like init_bank output
            component(proposal, flat) = static_cast<float>(component(proposal, flat) - scale * grad[flat]);
        }
        double proposal_loss;
        try {
            proposal_loss = loss_of(train, proposal);
        } catch (const ConfigError&) {
            step *= 0.5; // proposal collapsed an entry onto the zero frequency
            continue;
        } catch (const RankDeficiencyError&) {
            step *= 0.5;
            continue;
        }
        if (proposal_loss < train_loss) {
            current = std::move(proposal);
            train_loss = proposal_loss;
            step *= 1.5;
            const double h = loss_of(holdout, current);
            if (h < best_holdout) {
                best_holdout = h;
                best = FrequencyBank(current, bank.dc_index());
            }
        } else {
            step *= 0.5;
        }
    }
    return best;
}

} // namespace vff
