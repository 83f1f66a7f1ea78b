#include "echo/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "echo/errors.hpp"

namespace echo::units {

namespace {

constexpr std::array<UnitInfo, 46> kUnits{{
    // time
    {"s", Dimension::Time, 1.0},
    {"ms", Dimension::Time, 1e-3},
    {"us", Dimension::Time, 1e-6},
    {"ns", Dimension::Time, 1e-9},
    {"ps", Dimension::Time, 1e-12},
    // frequency (ordinary); "1/s" is accepted for rates
    {"Hz", Dimension::Frequency, 1.0},
    {"kHz", Dimension::Frequency, 1e3},
    {"MHz", Dimension::Frequency, 1e6},
    {"GHz", Dimension::Frequency, 1e9},
    {"THz", Dimension::Frequency, 1e12},
    {"1/s", Dimension::Frequency, 1.0},
    // length (wavelength axes and geometry)
    {"m", Dimension::Length, 1.0},
    {"cm", Dimension::Length, 1e-2},
    {"mm", Dimension::Length, 1e-3},
    {"um", Dimension::Length, 1e-6},
    {"nm", Dimension::Length, 1e-9},
    {"pm", Dimension::Length, 1e-12},
    // magnetic field
    {"T", Dimension::MagneticField, 1.0},
    {"mT", Dimension::MagneticField, 1e-3},
    {"uT", Dimension::MagneticField, 1e-6},
    // electric field
    {"V/m", Dimension::ElectricField, 1.0},
    {"V/cm", Dimension::ElectricField, 1e2},
    {"V/mm", Dimension::ElectricField, 1e3},
    {"kV/m", Dimension::ElectricField, 1e3},
    {"kV/cm", Dimension::ElectricField, 1e5},
    // voltage
    {"V", Dimension::Voltage, 1.0},
    {"mV", Dimension::Voltage, 1e-3},
    {"kV", Dimension::Voltage, 1e3},
    // temperature (kelvin scales only; no affine units)
    {"K", Dimension::Temperature, 1.0},
    {"mK", Dimension::Temperature, 1e-3},
    {"uK", Dimension::Temperature, 1e-6},
    // Stark coefficient: 1 kHz/(V/cm) = 1e3 Hz per 1e2 V/m = 10 Hz/(V/m)
    {"Hz/(V/m)", Dimension::StarkCoefficient, 1.0},
    {"kHz/(V/m)", Dimension::StarkCoefficient, 1e3},
    {"Hz/(V/cm)", Dimension::StarkCoefficient, 1e-2},
    {"kHz/(V/cm)", Dimension::StarkCoefficient, 10.0},
    {"MHz/(V/cm)", Dimension::StarkCoefficient, 1e4},
    // Stark pulse area: 1 V*us/cm = (1e2 V/m)*(1e-6 s) = 1e-4 (V/m)*s
    {"V*s/m", Dimension::StarkPulseArea, 1.0},
    {"V*us/m", Dimension::StarkPulseArea, 1e-6},
    {"V*s/cm", Dimension::StarkPulseArea, 1e2},
    {"V*us/cm", Dimension::StarkPulseArea, 1e-4},
    {"V*ns/cm", Dimension::StarkPulseArea, 1e-7},
    // dimensionless ordinates
    {"", Dimension::Dimensionless, 1.0},
    {"1", Dimension::Dimensionless, 1.0},
    {"arb", Dimension::Dimensionless, 1.0},
    {"counts", Dimension::Dimensionless, 1.0},
    {"ppm", Dimension::Dimensionless, 1.0},
}};

// Strip blanks and map micro-sign spellings onto "u".
std::string normalize(std::string_view tag) {
    std::string out;
    out.reserve(tag.size());
    for (size_t i = 0; i < tag.size();) {
        unsigned char c = static_cast<unsigned char>(tag[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        // UTF-8 micro sign U+00B5 (0xC2 0xB5) and Greek mu U+03BC (0xCE 0xBC)
        if (c == 0xC2 && i + 1 < tag.size() &&
            static_cast<unsigned char>(tag[i + 1]) == 0xB5) {
            out.push_back('u');
            i += 2;
            continue;
        }
        if (c == 0xCE && i + 1 < tag.size() &&
            static_cast<unsigned char>(tag[i + 1]) == 0xBC) {
            out.push_back('u');
            i += 2;
            continue;
        }
        out.push_back(static_cast<char>(c));
        ++i;
    }
    return out;
}

}  // namespace

std::optional<UnitInfo> find_unit(std::string_view tag) {
    const std::string norm = normalize(tag);
    for (const auto& u : kUnits) {
        if (u.name == norm) return u;
    }
    return std::nullopt;
}

bool compatible(std::string_view from, std::string_view to) {
    auto a = find_unit(from);
    auto b = find_unit(to);
    return a && b && a->dim == b->dim;
}

double convert(double value, std::string_view from, std::string_view to) {
    auto a = find_unit(from);
    if (!a) throw UnitError("unknown unit '" + std::string(from) + "'");
    auto b = find_unit(to);
    if (!b) throw UnitError("unknown unit '" + std::string(to) + "'");
    if (a->dim != b->dim) {
        throw UnitError("incompatible units: '" + std::string(from) + "' vs '" +
                        std::string(to) + "'");
    }
    // Single rounded ratio + single multiply keeps round trips within 1 ulp.
    return value * (a->to_si / b->to_si);
}

double to_si(double value, std::string_view tag) {
    auto u = find_unit(tag);
    if (!u) throw UnitError("unknown unit '" + std::string(tag) + "'");
    return value * u->to_si;
}

std::string_view si_unit(Dimension dim) {
    switch (dim) {
        case Dimension::Time: return "s";
        case Dimension::Frequency: return "Hz";
        case Dimension::Length: return "m";
        case Dimension::MagneticField: return "T";
        case Dimension::ElectricField: return "V/m";
        case Dimension::Voltage: return "V";
        case Dimension::Temperature: return "K";
        case Dimension::StarkCoefficient: return "Hz/(V/m)";
        case Dimension::StarkPulseArea: return "V*s/m";
        case Dimension::Dimensionless: return "arb";
    }
    return "";
}

Quantity parse_quantity(std::string_view text) {
    size_t begin = 0;
    while (begin < text.size() &&
           std::isspace(static_cast<unsigned char>(text[begin])))
        ++begin;
    size_t end = begin;
    while (end < text.size()) {
        char c = text[end];
        if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.' ||
            c == 'e' || c == 'E') {
            // 'e'/'E' only count as part of the number when followed by digits
            if ((c == 'e' || c == 'E') &&
                !(end + 1 < text.size() &&
                  (std::isdigit(static_cast<unsigned char>(text[end + 1])) ||
                   text[end + 1] == '+' || text[end + 1] == '-'))) {
                break;
            }
            ++end;
        } else {
            break;
        }
    }
    if (end == begin) {
        throw UnitError("cannot parse quantity from '" + std::string(text) + "'");
    }
    const std::string num(text.substr(begin, end - begin));
    char* tail = nullptr;
    const double value = std::strtod(num.c_str(), &tail);
    if (tail == num.c_str()) {
        throw UnitError("cannot parse number in '" + std::string(text) + "'");
    }
    Quantity q;
    q.value = value;
    q.unit = normalize(text.substr(end));
    if (!find_unit(q.unit)) {
        throw UnitError("unknown unit '" + q.unit + "' in '" + std::string(text) +
                        "'");
    }
    return q;
}

double parse_si(std::string_view text) {
    const Quantity q = parse_quantity(text);
    return to_si(q.value, q.unit);
}

}  // namespace echo::units
