#include "vff/local_field.hpp"

#include <numbers>

#include "vff/error.hpp"

namespace vff {

AmpPhase coeff_to_amp_phase(double c, double d)
{
    const double a = std::hypot(c, d);
    if (a == 0.0) {
        return {0.0, 0.0};
    }
    double phi = std::atan2(d, c);
    if (phi >= std::numbers::pi) {
        phi = -std::numbers::pi;
    }
    return {a, phi};
}

SinCos amp_phase_to_coeff(AmpPhase ap)
{
    return {ap.amplitude * std::cos(ap.phase), ap.amplitude * std::sin(ap.phase)};
}

LocalField::LocalField(int channels, std::size_t n_basis)
    : channels_(channels)
    , n_basis_(n_basis)
    , data_(static_cast<std::size_t>(channels) * n_basis * 2, 0.0)
{
    if (channels <= 0) {
        throw StructuralError("local field needs at least one channel");
    }
}

std::vector<double> eval_local(const LocalField& field, const FrequencyBank& bank, Vec3 u, const PsfSpec& psf)
{
    if (field.n_basis() != bank.size()) {
        throw StructuralError("local field has " + std::to_string(field.n_basis()) + " terms, bank has " +
                              std::to_string(bank.size()));
    }
    psf.validate();
    const std::vector<double> atten = detail::attenuation_table(bank, psf);
    std::vector<double> out(static_cast<std::size_t>(field.channels()));
    detail::accumulate_terms(field.data().data(), field.channels(), bank, atten, u, out.data());
    return out;
}

LocalField phase_shift(const LocalField& field, const FrequencyBank& bank, Vec3 delta)
{
    if (field.n_basis() != bank.size()) {
        throw StructuralError("local field / bank size mismatch");
    }
    LocalField out = field;
    for (std::size_t i = 0; i < bank.size(); ++i) {
        const double alpha = dot(bank.omega(i), delta);
        for (int ch = 0; ch < field.channels(); ++ch) {
            detail::rotate_pair(out.c(ch, i), out.d(ch, i), alpha);
        }
    }
    return out;
}

namespace detail {

std::vector<double> attenuation_table(const FrequencyBank& bank, const PsfSpec& psf)
{
    std::vector<double> atten(bank.size(), 1.0);
    if (!psf.is_point()) {
        for (std::size_t i = 0; i < bank.size(); ++i) {
            atten[i] = psf_attenuation(bank.omega(i), psf);
        }
    }
    return atten;
}

} // namespace detail

} // namespace vff
