#include "echo/io/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "echo/errors.hpp"
#include "echo/units.hpp"

namespace echo::io {

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

struct ColSpec {
    std::string name;
    std::string unit;
};

ColSpec parse_colspec(const std::string& field, const std::string& origin,
                      int line_no) {
    const auto open = field.find('(');
    const auto close = field.rfind(')');
    if (open == std::string::npos || close == std::string::npos ||
        close < open) {
        std::ostringstream os;
        os << origin << ":" << line_no << ": column spec '" << field
           << "' is not name(unit)";
        throw IoError(os.str());
    }
    ColSpec spec;
    spec.name = field.substr(0, open);
    spec.unit = field.substr(open + 1, close - open - 1);
    while (!spec.name.empty() && spec.name.back() == ' ') spec.name.pop_back();
    while (!spec.name.empty() && spec.name.front() == ' ')
        spec.name.erase(spec.name.begin());
    return spec;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    // split only on commas outside parentheses: unit tags such as
    // "kHz/(V/cm)" contain none, but keep the parser honest anyway
    int depth = 0;
    for (char c : line) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        while (!f.empty() && (f.front() == ' ' || f.front() == '\t'))
            f.erase(f.begin());
        while (!f.empty() && (f.back() == ' ' || f.back() == '\t' ||
                              f.back() == '\r'))
            f.pop_back();
    }
    return out;
}

}  // namespace

std::string curve_to_string(const SweepCurve& curve,
                            const std::vector<std::string>& comments) {
    require_valid(validate(curve), "curve_to_string");
    std::ostringstream os;
    for (const auto& c : comments) os << "# " << c << "\n";
    if (!curve.label.empty()) os << "# label: " << curve.label << "\n";
    os << curve.abscissa_name << "(" << curve.abscissa_unit << "), "
       << curve.ordinate_name << "(" << curve.ordinate_unit << ")";
    if (curve.has_sigma()) os << ", sigma(" << curve.ordinate_unit << ")";
    os << "\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
        os << format_number(curve.abscissa[i]) << ", "
           << format_number(curve.ordinate[i]);
        if (curve.has_sigma()) os << ", " << format_number(curve.sigma[i]);
        os << "\n";
    }
    return os.str();
}

void write_curve(const std::filesystem::path& path, const SweepCurve& curve,
                 const std::vector<std::string>& comments) {
    write_file(path, curve_to_string(curve, comments));
}

SweepCurve read_curve_string(const std::string& text,
                             const std::string& origin) {
    SweepCurve curve;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_header = false;
    std::size_t n_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = line;
        while (!stripped.empty() && (stripped.front() == ' ' ||
                                     stripped.front() == '\t'))
            stripped.erase(stripped.begin());
        if (stripped.empty()) continue;
        if (stripped[0] == '#') {
            const std::string label_key = "# label: ";
            if (line.rfind(label_key, 0) == 0)
                curve.label = line.substr(label_key.size());
            continue;
        }
        const auto fields = split_fields(stripped);
        if (!have_header) {
            if (fields.size() < 2 || fields.size() > 3) {
                std::ostringstream os;
                os << origin << ":" << line_no
                   << ": header must have 2 or 3 columns, got " << fields.size();
                throw IoError(os.str());
            }
            const ColSpec a = parse_colspec(fields[0], origin, line_no);
            const ColSpec o = parse_colspec(fields[1], origin, line_no);
            curve.abscissa_name = a.name;
            curve.abscissa_unit = a.unit;
            curve.ordinate_name = o.name;
            curve.ordinate_unit = o.unit;
            if (fields.size() == 3) parse_colspec(fields[2], origin, line_no);
            if (!units::find_unit(curve.abscissa_unit)) {
                std::ostringstream os;
                os << origin << ":" << line_no << ": unknown unit '"
                   << curve.abscissa_unit << "'";
                throw IoError(os.str());
            }
            if (!units::find_unit(curve.ordinate_unit)) {
                std::ostringstream os;
                os << origin << ":" << line_no << ": unknown unit '"
                   << curve.ordinate_unit << "'";
                throw IoError(os.str());
            }
            n_cols = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != n_cols) {
            std::ostringstream os;
            os << origin << ":" << line_no << ": expected " << n_cols
               << " values, got " << fields.size();
            throw IoError(os.str());
        }
        std::vector<double> values;
        for (const auto& f : fields) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0') {
                std::ostringstream os;
                os << origin << ":" << line_no << ": bad number '" << f << "'";
                throw IoError(os.str());
            }
            values.push_back(v);
        }
        curve.abscissa.push_back(values[0]);
        curve.ordinate.push_back(values[1]);
        if (n_cols == 3) curve.sigma.push_back(values[2]);
    }
    if (!have_header)
        throw IoError(origin + ": no header line found");
    return curve;
}

SweepCurve read_curve(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_curve_string(buf.str(), path.string());
}

std::string trace_to_string(const sim::EchoTrace& trace,
                            const std::vector<std::string>& comments) {
    SweepCurve curve;
    curve.abscissa = trace.times;
    curve.ordinate = trace.intensity;
    curve.abscissa_unit = "s";
    curve.ordinate_unit = "arb";
    curve.abscissa_name = "time";
    curve.ordinate_name = "intensity";
    curve.label = "echo_trace";
    std::vector<std::string> all = comments;
    for (const auto& m : trace.markers) {
        std::ostringstream os;
        os << "marker: " << m.label << " t=" << format_number(m.time_s);
        all.push_back(os.str());
    }
    return curve_to_string(curve, all);
}

void write_trace(const std::filesystem::path& path,
                 const sim::EchoTrace& trace,
                 const std::vector<std::string>& comments) {
    write_file(path, trace_to_string(trace, comments));
}

}  // namespace echo::io
