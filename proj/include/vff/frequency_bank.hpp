#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vff/geometry.hpp"

namespace vff {

/// The N angular frequencies shared by every voxel of a field. Exactly one
/// entry (dc_index) is the zero frequency; its cosine coefficient carries the
/// local mean.
class FrequencyBank {
public:
    /// Throws ConfigError unless the invariants hold: N >= 1, all components
    /// finite, omegas[dc_index] == (0,0,0) and no other entry is all-zero.
    FrequencyBank(std::vector<Vec3> omegas, std::size_t dc_index);

    std::size_t size() const { return omegas_.size(); }
    std::size_t dc_index() const { return dc_index_; }
    Vec3 omega(std::size_t i) const { return omegas_[i]; }
    std::span<const Vec3> omegas() const { return omegas_; }

    /// Copy with entry i replaced; the DC entry cannot be moved.
    FrequencyBank with_omega(std::size_t i, Vec3 omega) const;

    friend bool operator==(const FrequencyBank&, const FrequencyBank&) = default;

private:
    std::vector<Vec3> omegas_;
    std::size_t dc_index_ = 0;
};

} // namespace vff
