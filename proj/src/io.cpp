#include "lagdist/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace lagdist {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw Error(ErrorCode::ParseError, fmt::format("cannot parse {} from '{}'", what, text));
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value))
            throw Error(ErrorCode::ParseError, fmt::format("{} must be finite, got '{}'", what, text));
    }
    return value;
}

// Reads the next non-blank line; false at end of input.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty())
            return true;
    }
    return false;
}

void expect_header(std::istream& in, std::string_view header, std::size_t& line_no) {
    std::string line;
    if (!next_line(in, line, line_no) || trim(line) != header)
        throw Error(ErrorCode::ParseError, fmt::format("expected header '{}'", header));
}

}  // namespace

void write_counts_csv(std::ostream& out, const CountSeries& counts) {
    out << "t,n,k\n";
    const auto n = counts.n();
    const auto k = counts.k();
    for (std::size_t t = 0; t < counts.size(); ++t)
        fmt::print(out, "{},{},{}\n", t + 1, n[t], k[t]);
}

CountSeries read_counts_csv(std::istream& in) {
    std::size_t line_no = 0;
    expect_header(in, "t,n,k", line_no);
    std::vector<std::int64_t> n;
    std::vector<std::int64_t> k;
    std::string line;
    while (next_line(in, line, line_no)) {
        const auto fields = split(line, ',');
        if (fields.size() != 3)
            throw Error(ErrorCode::ParseError, fmt::format("line {}: expected 3 fields", line_no));
        const auto t = parse_number<std::int64_t>(fields[0], "t");
        if (t != static_cast<std::int64_t>(n.size()) + 1)
            throw Error(ErrorCode::ParseError,
                        fmt::format("line {}: t must be consecutive from 1, got {}", line_no, t));
        const auto nv = parse_number<std::int64_t>(fields[1], "n");
        const auto kv = parse_number<std::int64_t>(fields[2], "k");
        if (nv < 0 || kv < 0)
            throw Error(ErrorCode::ParseError, fmt::format("line {}: negative count", line_no));
        n.push_back(nv);
        k.push_back(kv);
    }
    if (n.empty())
        throw Error(ErrorCode::ParseError, "counts file has no data rows");
    return CountSeries(std::move(n), std::move(k));
}

void write_estimate_csv(std::ostream& out, std::span<const double> p, const StepCdf& cdf) {
    const auto i_hat = cdf.partial_sums();
    if (p.size() != i_hat.size())
        throw Error(ErrorCode::LengthMismatch, "probabilities and partial sums differ in length");
    const double ell = cdf.binning().ell();
    out << "j,p_hat,i_hat,tau_lo,tau_hi\n";
    for (std::size_t j = 0; j < p.size(); ++j)
        fmt::print(out, "{},{},{},{},{}\n", j, p[j], i_hat[j], ell * static_cast<double>(j),
                   ell * static_cast<double>(j + 1));
}

StepCdf read_estimate_csv(std::istream& in) {
    std::size_t line_no = 0;
    expect_header(in, "j,p_hat,i_hat,tau_lo,tau_hi", line_no);
    std::vector<double> i_hat;
    double ell = 0.0;
    std::string line;
    while (next_line(in, line, line_no)) {
        const auto fields = split(line, ',');
        if (fields.size() != 5)
            throw Error(ErrorCode::ParseError, fmt::format("line {}: expected 5 fields", line_no));
        const auto j = parse_number<std::int64_t>(fields[0], "j");
        if (j != static_cast<std::int64_t>(i_hat.size()))
            throw Error(ErrorCode::ParseError, fmt::format("line {}: j must count up from 0", line_no));
        i_hat.push_back(parse_number<double>(fields[2], "i_hat"));
        const double lo = parse_number<double>(fields[3], "tau_lo");
        const double hi = parse_number<double>(fields[4], "tau_hi");
        if (j == 0)
            ell = hi - lo;
        else if (std::abs((hi - lo) - ell) > 1e-9 * ell)
            throw Error(ErrorCode::ParseError, fmt::format("line {}: uneven interval width", line_no));
    }
    if (i_hat.empty())
        throw Error(ErrorCode::ParseError, "estimate file has no data rows");
    const Binning binning(ell, static_cast<int>(i_hat.size()) - 1);
    return StepCdf::from_partial_sums(std::move(i_hat), binning);
}

void write_results_csv(std::ostream& out, const GridResult& result) {
    out << kResultsHeader << '\n';
    for (const auto& r : result.rows)
        fmt::print(out, "{},{},{},{},{},{},{},{},{},{}\n", r.m, r.ell, r.days, r.q, to_string(r.method),
                   r.mean_l2, r.std_l2, r.min_l2, r.failures, r.replications_completed);
}

namespace {

TrueDistribution parse_simple_distribution(std::string_view text) {
    if (text.starts_with("uniform:")) {
        const auto args = split(text.substr(8), ',');
        if (args.size() != 2)
            throw Error(ErrorCode::ParseError, fmt::format("uniform needs two bounds: '{}'", text));
        return TrueDistribution::uniform(parse_number<double>(args[0], "uniform lower bound"),
                                         parse_number<double>(args[1], "uniform upper bound"));
    }
    if (text.starts_with("point:"))
        return TrueDistribution::point_mass(parse_number<double>(trim(text.substr(6)), "point location"));
    throw Error(ErrorCode::ParseError,
                fmt::format("unknown distribution '{}' (uniform:a,b | point:d | mix:...)", text));
}

}  // namespace

TrueDistribution parse_distribution(std::string_view text) {
    text = trim(text);
    if (!text.starts_with("mix:"))
        return parse_simple_distribution(text);
    TrueDistribution::Mixture components;
    for (auto part : split(text.substr(4), '+')) {
        const auto star = part.find('*');
        if (star == std::string_view::npos)
            throw Error(ErrorCode::ParseError, fmt::format("mixture component '{}' lacks 'weight*'", part));
        components.push_back({parse_number<double>(trim(part.substr(0, star)), "mixture weight"),
                              parse_simple_distribution(trim(part.substr(star + 1)))});
    }
    return TrueDistribution::mixture(std::move(components));
}

std::string format_distribution(const TrueDistribution& dist) {
    struct Printer {
        std::string operator()(const TrueDistribution::PointMass& d) const {
            return fmt::format("point:{}", d.at);
        }
        std::string operator()(const TrueDistribution::Uniform& d) const {
            return fmt::format("uniform:{},{}", d.lo, d.hi);
        }
        std::string operator()(const TrueDistribution::Mixture& mix) const {
            std::string out = "mix:";
            for (std::size_t i = 0; i < mix.size(); ++i) {
                if (i > 0)
                    out += '+';
                out += fmt::format("{}*", mix[i].weight);
                out += std::visit(*this, mix[i].dist.alternatives());
            }
            return out;
        }
    };
    return std::visit(Printer{}, dist.alternatives());
}

IntensityProfile read_profile_csv(std::istream& in) {
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        std::string_view body = trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        for (auto field : split(body, ','))
            if (!field.empty())
                values.push_back(parse_number<double>(field, "intensity"));
    }
    if (values.size() != 24)
        throw Error(ErrorCode::ParseError,
                    fmt::format("profile needs 24 hourly values, found {}", values.size()));
    std::array<double, 24> hourly;
    std::ranges::copy(values, hourly.begin());
    return IntensityProfile(hourly);
}

IntensityProfile load_profile(std::string_view spec) {
    if (spec == "paper")
        return IntensityProfile::paper();
    std::istringstream in(read_file(std::filesystem::path(spec)));
    return read_profile_csv(in);
}

GridConfig read_grid_config(std::istream& in) {
    GridConfig cfg;
    cfg.methods = {Method::OlsNormalized};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ParseError, fmt::format("grid line {}: expected key=value", line_no));
        const auto key = trim(body.substr(0, eq));
        const auto value = trim(body.substr(eq + 1));
        if (key == "m") {
            cfg.spec.m_values.clear();
            for (auto v : split(value, ','))
                cfg.spec.m_values.push_back(parse_number<int>(v, "m"));
        } else if (key == "days") {
            cfg.spec.n_days_values.clear();
            for (auto v : split(value, ','))
                cfg.spec.n_days_values.push_back(parse_number<int>(v, "days"));
        } else if (key == "q") {
            cfg.spec.q_values.clear();
            for (auto v : split(value, ','))
                cfg.spec.q_values.push_back(parse_number<double>(v, "q"));
        } else if (key == "reps") {
            cfg.spec.replications = parse_number<int>(value, "reps");
        } else if (key == "seed") {
            cfg.spec.base_seed = parse_number<std::uint64_t>(value, "seed");
        } else if (key == "threads") {
            cfg.spec.threads = parse_number<unsigned>(value, "threads");
        } else if (key == "method") {
            cfg.methods.clear();
            for (auto v : split(value, ','))
                cfg.methods.push_back(parse_method(v));
        } else if (key == "dist") {
            cfg.spec.dist = parse_distribution(value);
        } else if (key == "profile") {
            cfg.spec.profile = load_profile(value);
        } else {
            throw Error(ErrorCode::ParseError, fmt::format("grid line {}: unknown key '{}'", line_no, key));
        }
    }
    if (!cfg.methods.empty())
        cfg.spec.method = cfg.methods.front();
    return cfg;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}' for reading", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, fmt::format("cannot open '{}' for writing", path.string()));
    out << contents;
    if (!out.flush())
        throw Error(ErrorCode::IoError, fmt::format("failed writing '{}'", path.string()));
}

}  // namespace lagdist
