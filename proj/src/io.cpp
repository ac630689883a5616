#include "peakopt/io.hpp"

#include "peakopt/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace peakopt {

std::string format_number(double v)
{
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

long parse_integer(std::string_view text)
{
    text = trim(text);
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(trim(line.substr(pos)));
            return out;
        }
        out.push_back(trim(line.substr(pos, next - pos)));
        pos = next + 1;
    }
}

std::vector<std::string_view> split_whitespace(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < line.size()) {
        const auto first = line.find_first_not_of(" \t\r", pos);
        if (first == std::string_view::npos) {
            break;
        }
        auto last = line.find_first_of(" \t\r", first);
        if (last == std::string_view::npos) {
            last = line.size();
        }
        out.push_back(line.substr(first, last - first));
        pos = last;
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace peakopt
