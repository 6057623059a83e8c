#include "hybridpop/descriptors.hpp"
#include "hybridpop/error.hpp"
#include "hybridpop/text.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace hybridpop
{
namespace
{

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

void expect_args(const Call& c, std::size_t lo, std::size_t hi, std::string_view what)
{
    if (c.args.size() < lo || c.args.size() > hi) {
        std::ostringstream msg;
        msg << what << ": " << c.name << " takes ";
        if (lo == hi) {
            msg << lo;
        }
        else {
            msg << lo << " to " << hi;
        }
        msg << " argument(s), got " << c.args.size();
        throw ConfigError(msg.str());
    }
}

std::pair<double, double> split_pair(std::string_view arg, char sep, std::string_view what)
{
    const auto k = arg.find(sep);
    if (k == std::string_view::npos) {
        throw ConfigError(std::string(what) + ": expected a '" + sep + "' pair, got '" + std::string(arg) + "'");
    }
    return {parse_number(arg.substr(0, k), what), parse_number(arg.substr(k + 1), what)};
}

bool is_bare_number(std::string_view text)
{
    text = trim(text);
    return !text.empty() && (std::isdigit(static_cast<unsigned char>(text.front())) || text.front() == '-' ||
                             text.front() == '+' || text.front() == '.');
}

std::string join_pairs(const std::vector<double>& keys, const std::vector<double>& values, char sep)
{
    std::string s;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        s += k ? ", " : "";
        s += to_text(keys[k]) + sep + to_text(values[k]);
    }
    return s;
}

} // namespace

Call parse_call(std::string_view text)
{
    text = trim(text);
    Call c;
    const auto open = text.find('(');
    if (open == std::string_view::npos) {
        if (text.empty() || text.find(')') != std::string_view::npos || text.find(',') != std::string_view::npos) {
            throw ConfigError("malformed descriptor '" + std::string(text) + "'");
        }
        c.name = std::string(text);
        return c;
    }
    if (text.back() != ')' || text.find('(', open + 1) != std::string_view::npos ||
        text.find(')') != text.size() - 1) {
        throw ConfigError("malformed descriptor '" + std::string(text) + "'");
    }
    c.name = std::string(trim(text.substr(0, open)));
    if (c.name.empty()) {
        throw ConfigError("descriptor without a name: '" + std::string(text) + "'");
    }
    std::string_view body = trim(text.substr(open + 1, text.size() - open - 2));
    if (body.empty()) {
        return c;
    }
    while (true) {
        const auto comma = body.find(',');
        const auto piece = trim(body.substr(0, comma));
        if (piece.empty()) {
            throw ConfigError("empty argument in '" + std::string(text) + "'");
        }
        c.args.emplace_back(piece);
        if (comma == std::string_view::npos) {
            break;
        }
        body.remove_prefix(comma + 1);
    }
    return c;
}

double parse_number(std::string_view text, std::string_view what)
{
    const std::string s(trim(text));
    if (s.empty()) {
        throw ConfigError(std::string(what) + ": empty number");
    }
    char* end = nullptr;
    errno     = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || std::isnan(v)) {
        throw ConfigError(std::string(what) + ": cannot read '" + s + "' as a number");
    }
    return v;
}

SpatialProfile parse_spatial(std::string_view text)
{
    constexpr std::string_view what = "spatial profile";
    if (is_bare_number(text)) {
        return spatial::Constant{parse_number(text, what)};
    }
    const Call c = parse_call(text);
    if (c.name == "constant") {
        expect_args(c, 1, 1, what);
        return spatial::Constant{parse_number(c.args[0], what)};
    }
    if (c.name == "cosine") {
        expect_args(c, 1, 64, what);
        spatial::Cosine cos{parse_number(c.args[0], what), {}};
        for (std::size_t k = 1; k < c.args.size(); ++k) {
            auto [amp, mode] = split_pair(c.args[k], '@', what);
            if (mode < 0 || mode != std::floor(mode)) {
                throw ConfigError("spatial profile: cosine mode must be a nonnegative integer");
            }
            cos.modes.push_back({amp, static_cast<int>(mode)});
        }
        return cos;
    }
    if (c.name == "table") {
        expect_args(c, 1, 100000, what);
        spatial::Table t;
        for (const auto& a : c.args) {
            auto [x, v] = split_pair(a, '=', what);
            t.x.push_back(x);
            t.values.push_back(v);
        }
        return t;
    }
    throw ConfigError("unknown spatial profile '" + c.name + "'");
}

AgeProfile parse_age(std::string_view text)
{
    constexpr std::string_view what = "age profile";
    if (is_bare_number(text)) {
        return age::Constant{parse_number(text, what)};
    }
    const Call c = parse_call(text);
    if (c.name == "constant") {
        expect_args(c, 1, 1, what);
        return age::Constant{parse_number(c.args[0], what)};
    }
    if (c.name == "exponential") {
        expect_args(c, 2, 2, what);
        return age::Exponential{parse_number(c.args[0], what), parse_number(c.args[1], what)};
    }
    if (c.name == "table") {
        expect_args(c, 1, 100000, what);
        age::Table t;
        for (const auto& a : c.args) {
            auto [x, v] = split_pair(a, '=', what);
            t.ages.push_back(x);
            t.values.push_back(v);
        }
        return t;
    }
    throw ConfigError("unknown age profile '" + c.name + "'");
}

DensityResponse parse_density(std::string_view text)
{
    constexpr std::string_view what = "density response";
    const Call c = parse_call(text);
    if (c.name == "constant") {
        expect_args(c, 0, 0, what);
        return density::Constant{};
    }
    if (c.name == "saturating") {
        expect_args(c, 1, 1, what);
        return density::Saturating{parse_number(c.args[0], what)};
    }
    if (c.name == "exponential") {
        expect_args(c, 1, 1, what);
        return density::Exponential{parse_number(c.args[0], what)};
    }
    if (c.name == "linear-threshold") {
        expect_args(c, 2, 2, what);
        return density::LinearThreshold{parse_number(c.args[0], what), parse_number(c.args[1], what)};
    }
    throw ConfigError("unknown density response '" + c.name + "'");
}

std::string format(const SpatialProfile& profile)
{
    if (auto p = std::get_if<spatial::Constant>(&profile)) {
        return "constant(" + to_text(p->value) + ")";
    }
    if (auto p = std::get_if<spatial::Cosine>(&profile)) {
        std::string s = "cosine(" + to_text(p->base);
        for (const auto& m : p->modes) {
            s += ", " + to_text(m.amplitude) + "@" + std::to_string(m.mode);
        }
        return s + ")";
    }
    const auto& t = std::get<spatial::Table>(profile);
    return "table(" + join_pairs(t.x, t.values, '=') + ")";
}

std::string format(const AgeProfile& profile)
{
    if (auto p = std::get_if<age::Constant>(&profile)) {
        return "constant(" + to_text(p->value) + ")";
    }
    if (auto p = std::get_if<age::Exponential>(&profile)) {
        return "exponential(" + to_text(p->initial) + ", " + to_text(p->decay) + ")";
    }
    const auto& t = std::get<age::Table>(profile);
    return "table(" + join_pairs(t.ages, t.values, '=') + ")";
}

std::string format(const DensityResponse& response)
{
    if (std::holds_alternative<density::Constant>(response)) {
        return "constant";
    }
    if (auto p = std::get_if<density::Saturating>(&response)) {
        return "saturating(" + to_text(p->half_saturation) + ")";
    }
    if (auto p = std::get_if<density::Exponential>(&response)) {
        return "exponential(" + to_text(p->rate) + ")";
    }
    const auto& p = std::get<density::LinearThreshold>(response);
    return "linear-threshold(" + to_text(p.slope) + ", " + to_text(p.cap) + ")";
}

} // namespace hybridpop
