#pragma once

#include <gem/core.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gem {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Comma-separated table with a header row. Doubles use shortest
/// round-trip formatting, so identical inputs give identical bytes.
class CsvWriter
{
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size())
    {
        row(header);
    }

    CsvWriter& cell(double v) { return put(format_double(v)); }
    CsvWriter& cell(long long v) { return put(std::to_string(v)); }
    CsvWriter& cell(std::size_t v) { return put(std::to_string(v)); }
    CsvWriter& cell(int v) { return put(std::to_string(v)); }
    CsvWriter& cell(const std::string& s)
    {
        if (s.find_first_of(",\"\n") == std::string::npos)
            return put(s);
        std::string q = "\"";
        for (char c : s) {
            if (c == '"')
                q += '"';
            q += c;
        }
        return put(q + "\"");
    }
    CsvWriter& cell(const char* s) { return cell(std::string(s)); }

    void end_row()
    {
        if (in_row_ != columns_)
            throw std::logic_error("csv row has " + std::to_string(in_row_) + " cells, expected " +
                                   std::to_string(columns_));
        text_ << '\n';
        in_row_ = 0;
    }

    void row(const std::vector<std::string>& cells)
    {
        for (const auto& c : cells)
            cell(c);
        end_row();
    }

    std::string str() const { return text_.str(); }

    /// Writes via a temporary file and a rename.
    void save(const std::filesystem::path& path) const
    {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary);
            if (!f)
                throw std::runtime_error("cannot write " + tmp);
            f << text_.str();
        }
        std::filesystem::rename(tmp, path);
    }

private:
    CsvWriter& put(const std::string& s)
    {
        if (in_row_ > 0)
            text_ << ',';
        text_ << s;
        ++in_row_;
        return *this;
    }

    std::size_t columns_;
    std::size_t in_row_ = 0;
    std::ostringstream text_;
};

} // namespace gem
