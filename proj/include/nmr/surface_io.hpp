#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nmr/errors.hpp"
#include "nmr/surface.hpp"

namespace nmr {

/// Writes {"E":..,"F":..,"points":[[[x,y,z],...],...]} with 17 significant digits.
inline void write_control_net(std::ostream& os, const ControlNet& net) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << "{\"E\":" << net.rows() << ",\"F\":" << net.cols() << ",\"points\":[";
    for (std::size_t e = 0; e < net.rows(); ++e) {
        buf << (e ? ",\n  [" : "\n  [");
        for (std::size_t f = 0; f < net.cols(); ++f) {
            const auto& p = net.at(e, f);
            buf << (f ? "," : "") << '[' << p.x() << ',' << p.y() << ',' << p.z() << ']';
        }
        buf << ']';
    }
    buf << "\n]}\n";
    os << buf.str();
}

inline std::string control_net_to_json(const ControlNet& net) {
    std::ostringstream os;
    write_control_net(os, net);
    return os.str();
}

inline ControlNet read_control_net(std::istream& is) {
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("control net JSON: ") + ex.what(), 0);
    }
    try {
        const auto rows = doc.at("E").get<std::size_t>();
        const auto cols = doc.at("F").get<std::size_t>();
        const auto& grid = doc.at("points");
        if (!grid.is_array() || grid.size() != rows)
            throw ParseError("control net JSON: \"points\" must hold E rows", 0);
        std::vector<SurfacePoint> pts;
        pts.reserve(rows * cols);
        for (const auto& row : grid) {
            if (!row.is_array() || row.size() != cols)
                throw ParseError("control net JSON: every row must hold F points", 0);
            for (const auto& p : row) {
                if (!p.is_array() || p.size() != 3)
                    throw ParseError("control net JSON: points must be [x,y,z]", 0);
                pts.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
            }
        }
        return ControlNet(rows, cols, std::move(pts));
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("control net JSON: ") + ex.what(), 0);
    } catch (const InvalidArgument& ex) {
        throw ParseError(ex.what(), 0);
    }
}

inline ControlNet control_net_from_json(const std::string& text) {
    std::istringstream is(text);
    return read_control_net(is);
}

inline ControlNet load_control_net(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path, 0);
    return read_control_net(in);
}

}  // namespace nmr
