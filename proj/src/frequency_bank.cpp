#include "vff/frequency_bank.hpp"

#include <string>

#include "vff/error.hpp"

namespace vff {

namespace {

bool is_zero(Vec3 v) { return v.x == 0.0 && v.y == 0.0 && v.t == 0.0; }

} // namespace

FrequencyBank::FrequencyBank(std::vector<Vec3> omegas, std::size_t dc_index)
    : omegas_(std::move(omegas))
    , dc_index_(dc_index)
{
    if (omegas_.empty()) {
        throw ConfigError("frequency bank needs at least one entry");
    }
    if (dc_index_ >= omegas_.size()) {
        throw ConfigError("dc_index " + std::to_string(dc_index_) + " out of range");
    }
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
        if (!is_finite(omegas_[i])) {
            throw ConfigError("non-finite frequency at index " + std::to_string(i));
        }
        if (i == dc_index_) {
            if (!is_zero(omegas_[i])) {
                throw ConfigError("dc entry must be (0,0,0)");
            }
        } else if (is_zero(omegas_[i])) {
            throw ConfigError("duplicate zero frequency at index " + std::to_string(i));
        }
    }
}

FrequencyBank FrequencyBank::with_omega(std::size_t i, Vec3 omega) const
{
    if (i == dc_index_) {
        throw ConfigError("the dc entry is fixed");
    }
    std::vector<Vec3> next = omegas_;
    next.at(i) = omega;
    return FrequencyBank(std::move(next), dc_index_);
}

} // namespace vff
