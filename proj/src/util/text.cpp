#include "nvmflow/util/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nvmflow::util {

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b)
{
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

std::optional<double> parse_number(std::string_view token)
{
    token = trim(token);
    if (token.empty()) return std::nullopt;

    // strtod needs a terminated buffer; from_chars<double> is not available
    // on every libstdc++ we build against.
    std::string buf(token);
    char* end = nullptr;
    double value = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str()) return std::nullopt;
    std::string rest = to_lower(std::string_view(end));

    int exp10 = 0;
    if (rest.rfind("meg", 0) == 0) {
        exp10 = 6;
        rest.erase(0, 3);
    } else if (!rest.empty()) {
        switch (rest.front()) {
        case 'f': exp10 = -15; break;
        case 'p': exp10 = -12; break;
        case 'n': exp10 = -9; break;
        case 'u': exp10 = -6; break;
        case 'm': exp10 = -3; break;
        case 'k': exp10 = 3; break;
        case 'g': exp10 = 9; break;
        case 't': exp10 = 12; break;
        default: break;
        }
        if (exp10 != 0) rest.erase(0, 1);
    }
    if (!std::all_of(rest.begin(), rest.end(), [](unsigned char c) { return std::isalpha(c); }))
        return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    if (exp10 == 0) return value;

    // Reparse with the suffix folded into the exponent so "5u" == 5e-6 exactly.
    std::string mantissa(buf.c_str(), static_cast<size_t>(end - buf.c_str()));
    const size_t e = mantissa.find_first_of("eE");
    if (e != std::string::npos) {
        exp10 += std::stoi(mantissa.substr(e + 1));
        mantissa.erase(e);
    }
    value = std::strtod((mantissa + "e" + std::to_string(exp10)).c_str(), nullptr);
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

std::string format_double(double v)
{
    char buf[40];
    for (int prec = 12; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::optional<std::pair<std::string, std::string>> split_assignment(std::string_view token)
{
    auto eq = token.find('=');
    if (eq == std::string_view::npos || eq == 0) return std::nullopt;
    return std::make_pair(to_lower(trim(token.substr(0, eq))), std::string(trim(token.substr(eq + 1))));
}

std::vector<KeyValue> parse_key_value_lines(std::string_view text)
{
    std::vector<KeyValue> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto body = trim(line);
        if (body.empty()) continue;
        auto kv = split_assignment(body);
        if (!kv || kv->second.empty())
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key=value");
        out.push_back({kv->first, kv->second, lineno});
    }
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace nvmflow::util
