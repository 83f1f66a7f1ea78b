// units.hpp - unit tags and scale-factor conversions
//
// Everything inside the library is SI base: seconds, hertz (ordinary
// frequency, FWHM for linewidths), tesla, volts per meter, kelvin.
// Convenience units (us, kHz, mT, V/cm, mK, ...) exist only at the
// ingestion/emission boundary and are converted through this table.
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace echo::units {

enum class Dimension {
    Time,
    Frequency,      // ordinary frequency unless a caller says otherwise
    Length,
    MagneticField,
    ElectricField,
    Voltage,
    Temperature,
    StarkCoefficient,  // Hz per (V/m)
    StarkPulseArea,    // (V/m)*s
    Dimensionless,     // counts, arb, unitless ordinates
};

struct UnitInfo {
    std::string_view name;   // canonical spelling, no embedded spaces
    Dimension dim;
    double to_si;            // multiply to reach the SI base unit
};

/// Look up a unit tag. Whitespace is ignored; "µs"/"μs" normalize to "us".
std::optional<UnitInfo> find_unit(std::string_view tag);

/// True when both tags name units of the same dimension.
bool compatible(std::string_view from, std::string_view to);

/// Scale-factor conversion. Throws UnitError for unknown tags or when the
/// dimensions differ (the message names both units).
double convert(double value, std::string_view from, std::string_view to);

/// Convert to the SI base unit of the tag's dimension.
double to_si(double value, std::string_view tag);

/// Canonical SI unit tag for a dimension ("s", "Hz", ...).
std::string_view si_unit(Dimension dim);

/// Parse "64.1 us" / "5.8 kHz/(V/cm)" / "42" into value + unit tag.
/// A missing unit yields the empty (dimensionless) tag.
struct Quantity {
    double value = 0.0;
    std::string unit;
};
Quantity parse_quantity(std::string_view text);

/// Parse and convert to SI in one step.
double parse_si(std::string_view text);

}  // namespace echo::units
