#include "output.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace fracshrink::cli {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string CsvTable::render() const {
    std::string out = "# schema=" + std::to_string(kCsvSchema) + "\r\n";
    for (const auto& c : comments) {
        // Comment lines are single-line by construction.
        std::string line = c;
        for (char& ch : line)
            if (ch == '\n' || ch == '\r') ch = ' ';
        out += "# " + line + "\r\n";
    }
    auto emit = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_field(fields[i]);
        }
        out += "\r\n";
    };
    emit(header);
    for (const auto& r : rows) emit(r);
    return out;
}

std::string cell(double x) { return std::isfinite(x) ? format_number(x) : std::string(); }

std::string cell(const std::optional<double>& x) { return x ? cell(*x) : std::string(); }

nlohmann::json number_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

nlohmann::json number_or_null(const std::optional<double>& x) {
    return x ? number_or_null(*x) : nlohmann::json(nullptr);
}

void write_atomically(const std::string& path, const std::string& content,
                      std::ostream& fallback) {
    if (path.empty()) {
        fallback << content;
        fallback.flush();
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot move output into place at " + path + ": " + ec.message());
    }
}

}  // namespace fracshrink::cli
