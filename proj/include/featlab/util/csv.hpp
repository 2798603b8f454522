#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace featlab {

// %.17g prints doubles losslessly and identically across runs
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using CsvCell = std::variant<std::string, double, long long>;

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path);
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        write_row_(header);
    }

    void row(const std::vector<CsvCell>& cells) {
        std::vector<std::string> s;
        s.reserve(cells.size());
        for (const auto& c : cells) {
            if (std::holds_alternative<std::string>(c))
                s.push_back(std::get<std::string>(c));
            else if (std::holds_alternative<double>(c))
                s.push_back(fmt_double(std::get<double>(c)));
            else
                s.push_back(std::to_string(std::get<long long>(c)));
        }
        write_row_(s);
    }
    void row(std::initializer_list<CsvCell> cells) { row(std::vector<CsvCell>(cells)); }

private:
    void write_row_(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    std::ofstream out_;
};

}  // namespace featlab
