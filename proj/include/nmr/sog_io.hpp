#pragma once

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "nmr/csv.hpp"
#include "nmr/errors.hpp"
#include "nmr/sampler.hpp"

namespace nmr {

/// CSV grid: a header line `width,height,resolution,M,t` holding the values
/// (optionally preceded by a line with those literal names), then `height`
/// rows of `width` integer labels.
inline SemanticOccupancyGrid read_sog_csv(std::istream& is) {
    const auto rows = csv::read_rows(is);
    if (rows.empty()) throw ParseError("SOG CSV: missing header", 0);
    const auto& head = rows.front();
    if (head.fields.size() != 5)
        throw ParseError("SOG CSV: header must be width,height,resolution,M,t", head.line);
    SemanticOccupancyGrid g;
    g.width = static_cast<int>(csv::parse_int(head.fields[0], head.line));
    g.height = static_cast<int>(csv::parse_int(head.fields[1], head.line));
    g.resolution = csv::parse_double(head.fields[2], head.line);
    g.num_classes = static_cast<int>(csv::parse_int(head.fields[3], head.line));
    g.t = static_cast<int>(csv::parse_int(head.fields[4], head.line));
    if (g.num_classes != 5) g.class_names.clear();
    if (g.width < 1 || g.height < 1) throw ParseError("SOG CSV: width and height must be >= 1", head.line);
    if (rows.size() - 1 != static_cast<std::size_t>(g.height))
        throw ParseError("SOG CSV: expected " + std::to_string(g.height) + " label rows, got " +
                             std::to_string(rows.size() - 1),
                         rows.back().line);
    g.labels.reserve(static_cast<std::size_t>(g.width) * g.height);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != static_cast<std::size_t>(g.width))
            throw ParseError("SOG CSV: expected " + std::to_string(g.width) + " labels", row.line);
        for (const auto& f : row.fields) {
            const auto l = csv::parse_int(f, row.line);
            if (l < 0 || l >= g.num_classes)
                throw ParseError("SOG CSV: label " + std::to_string(l) + " outside 0..M-1", row.line);
            g.labels.push_back(static_cast<int>(l));
        }
    }
    try {
        g.validate();
    } catch (const InvalidArgument& ex) {
        throw ParseError(ex.what(), head.line);
    }
    return g;
}

inline void write_sog_csv(std::ostream& os, const SemanticOccupancyGrid& g) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << g.width << ',' << g.height << ',' << g.resolution << ',' << g.num_classes << ',' << g.t << '\n';
    for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) buf << (c ? "," : "") << g.at(r, c);
        buf << '\n';
    }
    os << buf.str();
}

/// 8-bit PGM (P5 binary or P2 ASCII); pixel value = class id. M is the larger
/// of 5 and (max label + 1); resolution defaults to one meter per cell.
inline SemanticOccupancyGrid read_sog_pgm(std::istream& is, double resolution = 1.0) {
    std::string magic;
    is >> magic;
    if (magic != "P5" && magic != "P2") throw ParseError("PGM: expected P5 or P2 magic", 1);
    auto next_int = [&]() {
        for (;;) {
            is >> std::ws;
            if (is.peek() == '#') {
                std::string skip;
                std::getline(is, skip);
                continue;
            }
            long long v = -1;
            if (!(is >> v)) throw ParseError("PGM: truncated header", 0);
            return v;
        }
    };
    const auto w = next_int(), h = next_int(), maxval = next_int();
    if (w < 1 || h < 1) throw ParseError("PGM: width and height must be >= 1", 0);
    if (maxval < 1 || maxval > 255) throw ParseError("PGM: only 8-bit images are supported", 0);
    SemanticOccupancyGrid g;
    g.width = static_cast<int>(w);
    g.height = static_cast<int>(h);
    g.resolution = resolution;
    g.labels.resize(static_cast<std::size_t>(w * h));
    if (magic == "P5") {
        is.get();  // single whitespace after maxval
        std::string data(g.labels.size(), '\0');
        if (!is.read(data.data(), static_cast<std::streamsize>(data.size())))
            throw ParseError("PGM: truncated pixel data", 0);
        for (std::size_t i = 0; i < data.size(); ++i) g.labels[i] = static_cast<unsigned char>(data[i]);
    } else {
        for (auto& l : g.labels) l = static_cast<int>(next_int());
    }
    int top = 0;
    for (int l : g.labels) top = std::max(top, l);
    g.num_classes = std::max(5, top + 1);
    if (g.num_classes != 5) g.class_names.clear();
    return g;
}

/// Dispatches on the PGM magic; everything else is read as CSV.
inline SemanticOccupancyGrid load_sog(const std::string& path, double pgm_resolution = 1.0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path, 0);
    char magic[2] = {0, 0};
    in.read(magic, 2);
    in.clear();
    in.seekg(0);
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2')) return read_sog_pgm(in, pgm_resolution);
    return read_sog_csv(in);
}

inline void write_samples_csv(std::ostream& os, const SampleSet& set) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << "class,row,col,s_u,s_v,weight\n";
    for (const auto& cls : set.per_class)
        for (const auto& s : cls)
            buf << s.label << ',' << s.row << ',' << s.col << ',' << s.s_u << ',' << s.s_v << ','
                << s.weight << '\n';
    os << buf.str();
}

/// Reads the samples CSV back; `num_classes` sizes the per-class table.
inline SampleSet read_samples_csv(std::istream& is, int num_classes, std::uint64_t seed = 0) {
    SampleSet set;
    set.seed = seed;
    set.per_class.resize(static_cast<std::size_t>(num_classes));
    for (const auto& row : csv::read_rows(is)) {
        if (row.fields.size() != 6) throw ParseError("samples CSV: expected 6 columns", row.line);
        Sample s;
        s.label = static_cast<int>(csv::parse_int(row.fields[0], row.line));
        s.row = static_cast<int>(csv::parse_int(row.fields[1], row.line));
        s.col = static_cast<int>(csv::parse_int(row.fields[2], row.line));
        s.s_u = csv::parse_double(row.fields[3], row.line);
        s.s_v = csv::parse_double(row.fields[4], row.line);
        s.weight = csv::parse_double(row.fields[5], row.line);
        if (s.label < 0 || s.label >= num_classes) throw ParseError("samples CSV: class out of range", row.line);
        set.per_class[static_cast<std::size_t>(s.label)].push_back(s);
    }
    return set;
}

}  // namespace nmr
