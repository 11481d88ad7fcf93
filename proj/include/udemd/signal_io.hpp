#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "udemd/binary.hpp"
#include "udemd/embedding.hpp"
#include "udemd/error.hpp"
#include "udemd/metric.hpp"
#include "udemd/signal_set.hpp"

namespace udemd {

namespace csv {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;  // "#" lines without the marker
};

/// Comma-separated numeric table. The first row is a header when any of
/// its fields is not a number.
inline Table read_table(std::istream& in) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '#') {
            t.comments.emplace_back(trim(body.substr(1)));
            continue;
        }
        auto fields = split(body);
        std::vector<double> values;
        values.reserve(fields.size());
        bool numeric = true;
        for (const auto& f : fields) {
            auto v = parse_double(f);
            if (!v) {
                numeric = false;
                break;
            }
            values.push_back(*v);
        }
        if (!numeric) {
            require(first, ErrorCode::ParseError, "line " + std::to_string(line_no) + ": non-numeric field");
            t.header = std::move(fields);
            first = false;
            continue;
        }
        first = false;
        if (!t.rows.empty() && values.size() != t.rows.front().size())
            fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(t.rows.front().size()) + " fields, found " +
                                            std::to_string(values.size()));
        t.rows.push_back(std::move(values));
    }
    require(t.header.empty() || t.rows.empty() || t.header.size() == t.rows.front().size(), ErrorCode::ParseError,
            "header width does not match the data");
    return t;
}

} // namespace csv

enum class SignalFormat { DenseCsv, CoordinateCsv, Binary };

namespace detail {

inline std::vector<unsigned char> slurp(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline constexpr std::string_view signal_magic = "UDEMDSIG";
inline constexpr std::string_view embedding_magic = "UDEMDEMB";
inline constexpr std::uint8_t format_version = 1;

inline void check_magic(binary::Reader& r, std::string_view magic) {
    require(r.remaining() >= magic.size() + 1, ErrorCode::VersionMismatch, "file too short for a header");
    const auto got = r.get_bytes(magic.size());
    require(got == magic, ErrorCode::VersionMismatch, "bad magic '" + got + "'");
    const auto version = r.get<std::uint8_t>();
    require(version == format_version, ErrorCode::VersionMismatch,
            "unsupported format version " + std::to_string(version));
}

inline SignalSet signals_from_table(const csv::Table& t, std::optional<std::size_t> expected_rows) {
    require(!t.rows.empty(), ErrorCode::ParseError, "no data rows");
    const std::size_t n = t.rows.size(), m = t.rows.front().size();
    if (expected_rows)
        require(n == *expected_rows, ErrorCode::RowCountMismatch,
                "expected " + std::to_string(*expected_rows) + " rows, found " + std::to_string(n));
    std::vector<double> values(n * m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const double v = t.rows[i][j];
            require(std::isfinite(v), ErrorCode::ParseError, "non-finite entry");
            require(v >= 0.0, ErrorCode::NegativeEntry,
                    "entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is negative");
            values[j * n + i] = v;
        }
    SignalSet s(n, m, std::move(values));
    s.set_labels(t.header);
    return s;
}

inline SignalSet signals_from_coordinates(const csv::Table& t, std::optional<std::size_t> expected_rows) {
    require(expected_rows.has_value(), ErrorCode::InvalidArgument, "coordinate format needs the node count");
    const std::size_t n = *expected_rows;
    std::size_t m = 0;
    for (const auto& r : t.rows) {
        require(r.size() == 3, ErrorCode::ParseError, "coordinate rows need node,signal,value");
        require(r[0] >= 0 && r[1] >= 0 && r[0] == std::floor(r[0]) && r[1] == std::floor(r[1]),
                ErrorCode::ParseError, "coordinate indices must be nonnegative integers");
        require(static_cast<std::size_t>(r[0]) < n, ErrorCode::RowCountMismatch,
                "node index " + std::to_string(static_cast<std::size_t>(r[0])) + " outside 0.." +
                    std::to_string(n - 1));
        m = std::max(m, static_cast<std::size_t>(r[1]) + 1);
    }
    require(m > 0, ErrorCode::ParseError, "no data rows");
    SignalSet s(n, m);
    for (const auto& r : t.rows) {
        require(std::isfinite(r[2]), ErrorCode::ParseError, "non-finite entry");
        require(r[2] >= 0.0, ErrorCode::NegativeEntry, "negative entry");
        s(static_cast<std::size_t>(r[0]), static_cast<std::size_t>(r[1])) += r[2];
    }
    return s;
}

} // namespace detail

/// Reads a signal matrix; rows are graph nodes, columns are signals.
/// The result is never flagged normalized.
inline SignalSet load_signals(std::istream& in, std::optional<std::size_t> expected_rows,
                              SignalFormat format = SignalFormat::DenseCsv) {
    if (format == SignalFormat::Binary) {
        binary::Reader r(detail::slurp(in));
        detail::check_magic(r, detail::signal_magic);
        const auto n = r.get<std::uint64_t>();
        const auto m = r.get<std::uint64_t>();
        r.get<std::uint8_t>();  // normalized flag of the writer, informational
        const auto label_count = r.get_count(4);
        std::vector<std::string> labels;
        for (std::uint64_t i = 0; i < label_count; ++i) labels.push_back(r.get_string());
        const auto count = r.get_count(8);
        require(count == n * m, ErrorCode::ChecksumFailure, "payload size does not match header");
        std::vector<double> values(count);
        for (auto& v : values) v = r.get<double>();
        r.verify_seal();
        if (expected_rows)
            require(n == *expected_rows, ErrorCode::RowCountMismatch,
                    "expected " + std::to_string(*expected_rows) + " rows, found " + std::to_string(n));
        SignalSet s(n, m, std::move(values));
        s.set_labels(std::move(labels));
        return s;
    }
    const auto table = csv::read_table(in);
    if (format == SignalFormat::CoordinateCsv) return detail::signals_from_coordinates(table, expected_rows);
    return detail::signals_from_table(table, expected_rows);
}

inline SignalSet load_signals_file(const std::string& path, std::optional<std::size_t> expected_rows,
                                   std::optional<SignalFormat> format = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open signal file '" + path + "'");
    SignalFormat f = format.value_or(SignalFormat::DenseCsv);
    if (!format && path.size() >= 4 && path.substr(path.size() - 4) == ".bin") f = SignalFormat::Binary;
    return load_signals(in, expected_rows, f);
}

inline void save_signals_csv(std::ostream& out, const SignalSet& s) {
    if (!s.labels().empty()) {
        for (std::size_t j = 0; j < s.signal_count(); ++j) out << (j ? "," : "") << s.labels()[j];
        out << '\n';
    }
    for (std::size_t i = 0; i < s.node_count(); ++i) {
        for (std::size_t j = 0; j < s.signal_count(); ++j) out << (j ? "," : "") << csv::format_double(s(i, j));
        out << '\n';
    }
}

inline void save_signals_binary(std::ostream& out, const SignalSet& s) {
    binary::Writer w;
    w.put_bytes(detail::signal_magic);
    w.put(detail::format_version);
    w.put(static_cast<std::uint64_t>(s.node_count()));
    w.put(static_cast<std::uint64_t>(s.signal_count()));
    w.put(static_cast<std::uint8_t>(s.normalized()));
    w.put(static_cast<std::uint64_t>(s.labels().size()));
    for (const auto& l : s.labels()) w.put_string(l);
    w.put(static_cast<std::uint64_t>(s.data().size()));
    for (double v : s.data()) w.put(v);
    w.seal();
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
}

// ---------------------------------------------------------------------------
// Embeddings

inline void save_embedding(std::ostream& out, const MultiscaleEmbedding& e, std::string_view note = {}) {
    binary::Writer w;
    w.put_bytes(detail::embedding_magic);
    w.put(detail::format_version);
    w.put(static_cast<std::uint64_t>(e.node_count()));
    w.put(static_cast<std::uint64_t>(e.signal_count()));
    w.put(static_cast<std::uint32_t>(e.config().scales));
    w.put(e.config().alpha);
    w.put(static_cast<std::uint8_t>(e.config().weight_sign));
    w.put(static_cast<std::uint8_t>(e.config().keep_mass));
    w.put(static_cast<std::uint64_t>(e.weights().size()));
    for (double x : e.weights()) w.put(x);
    w.put(e.config().subsample.rate);
    w.put(e.config().subsample.seed);
    w.put(static_cast<std::uint64_t>(e.band_width()));
    w.put(e.graph_fingerprint());
    w.put(static_cast<std::uint64_t>(e.kept_coordinates().size()));
    for (const auto& band : e.kept_coordinates()) {
        w.put(static_cast<std::uint64_t>(band.size()));
        for (auto c : band) w.put(static_cast<std::uint64_t>(c));
    }
    w.put_string(note);
    w.put(static_cast<std::uint64_t>(e.data().size()));
    for (double x : e.data()) w.put(x);
    w.seal();
    out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
}

struct LoadedEmbedding {
    MultiscaleEmbedding embedding;
    std::string note;
};

inline LoadedEmbedding load_embedding_with_note(std::istream& in) {
    binary::Reader r(detail::slurp(in));
    detail::check_magic(r, detail::embedding_magic);
    const auto n = r.get<std::uint64_t>();
    const auto m = r.get<std::uint64_t>();
    UdemdConfig cfg;
    cfg.scales = r.get<std::uint32_t>();
    cfg.alpha = r.get<double>();
    const auto sign = r.get<std::uint8_t>();
    require(sign <= 1, ErrorCode::VersionMismatch, "unknown weight convention");
    cfg.weight_sign = static_cast<WeightSign>(sign);
    cfg.keep_mass = r.get<std::uint8_t>() != 0;
    std::vector<double> weights(r.get_count(8));
    for (auto& x : weights) x = r.get<double>();
    cfg.subsample.rate = r.get<double>();
    cfg.subsample.seed = r.get<std::uint64_t>();
    const auto width = r.get<std::uint64_t>();
    const auto fingerprint = r.get<std::uint64_t>();
    std::vector<std::vector<std::size_t>> kept(r.get_count(8));
    for (auto& band : kept) {
        band.resize(r.get_count(8));
        for (auto& c : band) c = r.get<std::uint64_t>();
    }
    std::string note = r.get_string();
    const auto count = r.get_count(8);
    require(weights.size() == cfg.scales + 1ULL && count == m * (cfg.scales + 1ULL) * width,
            ErrorCode::ChecksumFailure, "payload size does not match header");
    MultiscaleEmbedding e(m, n, width, cfg, fingerprint);
    for (auto& x : e.mutable_data()) x = r.get<double>();
    r.verify_seal();
    e.set_weights(std::move(weights));
    e.set_kept_coordinates(std::move(kept));
    return {std::move(e), std::move(note)};
}

inline MultiscaleEmbedding load_embedding(std::istream& in) { return load_embedding_with_note(in).embedding; }

/// Text form: "# key=value" metadata lines followed by one CSV row per
/// signal. Values use the shortest round-trip decimal representation.
inline void save_embedding_text(std::ostream& out, const MultiscaleEmbedding& e) {
    const auto& cfg = e.config();
    out << "# udemd-embedding version=" << int(detail::format_version) << '\n';
    out << "# n=" << e.node_count() << '\n';
    out << "# m=" << e.signal_count() << '\n';
    out << "# K=" << cfg.scales << '\n';
    out << "# alpha=" << csv::format_double(cfg.alpha) << '\n';
    out << "# weight_sign=" << int(cfg.weight_sign) << '\n';
    out << "# keep_mass=" << int(cfg.keep_mass) << '\n';
    out << "# weights=";
    for (std::size_t k = 0; k < e.weights().size(); ++k) out << (k ? ";" : "") << csv::format_double(e.weights()[k]);
    out << '\n';
    out << "# subsample_rate=" << csv::format_double(cfg.subsample.rate) << '\n';
    out << "# subsample_seed=" << cfg.subsample.seed << '\n';
    out << "# band_width=" << e.band_width() << '\n';
    out << "# graph_fingerprint=" << e.graph_fingerprint() << '\n';
    for (std::size_t k = 0; k < e.kept_coordinates().size(); ++k) {
        out << "# kept" << k << '=';
        const auto& band = e.kept_coordinates()[k];
        for (std::size_t c = 0; c < band.size(); ++c) out << (c ? ";" : "") << band[c];
        out << '\n';
    }
    for (std::size_t i = 0; i < e.signal_count(); ++i) {
        auto row = e.row(i);
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv::format_double(row[c]);
        out << '\n';
    }
}

inline MultiscaleEmbedding load_embedding_text(std::istream& in) {
    const auto t = csv::read_table(in);
    std::map<std::string, std::string> meta;
    const auto header = std::find_if(t.comments.begin(), t.comments.end(),
                                     [](const std::string& c) { return c.rfind("udemd-embedding ", 0) == 0; });
    require(header != t.comments.end() && *header == "udemd-embedding version=1", ErrorCode::VersionMismatch,
            "missing or unsupported text embedding header");
    for (const auto& c : t.comments) {
        const auto eq = c.find('=');
        if (eq != std::string::npos) meta[c.substr(0, eq)] = c.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = meta.find(key);
        require(it != meta.end(), ErrorCode::ParseError, "missing metadata '" + key + "'");
        return it->second;
    };
    auto to_double = [](const std::string& s) {
        auto v = csv::parse_double(s);
        require(v.has_value(), ErrorCode::ParseError, "bad number '" + s + "'");
        return *v;
    };
    auto to_u64 = [](const std::string& s) { return static_cast<std::uint64_t>(std::stoull(s)); };

    UdemdConfig cfg;
    cfg.scales = static_cast<unsigned>(to_u64(get("K")));
    cfg.alpha = to_double(get("alpha"));
    cfg.weight_sign = static_cast<WeightSign>(to_u64(get("weight_sign")));
    cfg.keep_mass = to_u64(get("keep_mass")) != 0;
    cfg.subsample.rate = to_double(get("subsample_rate"));
    cfg.subsample.seed = to_u64(get("subsample_seed"));
    const auto n = to_u64(get("n")), m = to_u64(get("m")), width = to_u64(get("band_width"));
    MultiscaleEmbedding e(m, n, width, cfg, to_u64(get("graph_fingerprint")));
    std::vector<double> weights;
    for (const auto& f : csv::split(get("weights"), ';')) weights.push_back(to_double(f));
    require(weights.size() == cfg.scales + 1ULL, ErrorCode::ParseError, "weight count mismatch");
    e.set_weights(std::move(weights));
    std::vector<std::vector<std::size_t>> kept;
    for (std::size_t k = 0; meta.count("kept" + std::to_string(k)); ++k) {
        std::vector<std::size_t> band;
        for (const auto& f : csv::split(meta["kept" + std::to_string(k)], ';')) band.push_back(to_u64(f));
        kept.push_back(std::move(band));
    }
    e.set_kept_coordinates(std::move(kept));
    require(t.rows.size() == m, ErrorCode::ParseError, "row count does not match m");
    for (std::size_t i = 0; i < m; ++i) {
        require(t.rows[i].size() == e.dimension(), ErrorCode::ParseError, "row width does not match the header");
        std::copy(t.rows[i].begin(), t.rows[i].end(), e.row(i).begin());
    }
    return e;
}

// ---------------------------------------------------------------------------
// Distance matrices and labels

inline void save_distance_matrix_csv(std::ostream& out, const DistanceMatrix& dm, std::string_view note = {}) {
    out << "# metric=" << dm.metric_name() << '\n';
    if (!note.empty()) out << "# " << note << '\n';
    for (std::size_t j = 0; j < dm.size(); ++j)
        out << (j ? "," : "") << (dm.labels().empty() ? "s" + std::to_string(j) : dm.labels()[j]);
    out << '\n';
    for (std::size_t i = 0; i < dm.size(); ++i) {
        for (std::size_t j = 0; j < dm.size(); ++j) out << (j ? "," : "") << csv::format_double(dm(i, j));
        out << '\n';
    }
}

inline DistanceMatrix load_distance_matrix_csv(std::istream& in) {
    const auto t = csv::read_table(in);
    const std::size_t m = t.rows.size();
    require(m > 0, ErrorCode::ParseError, "empty distance matrix");
    std::string name = "unknown";
    for (const auto& c : t.comments)
        if (c.rfind("metric=", 0) == 0) name = c.substr(7);
    DistanceMatrix dm(m, name);
    for (std::size_t i = 0; i < m; ++i) {
        require(t.rows[i].size() == m, ErrorCode::ParseError, "distance matrix must be square");
        for (std::size_t j = 0; j < m; ++j) dm(i, j) = t.rows[i][j];
    }
    if (!t.header.empty()) dm.set_labels(t.header);
    return dm;
}

/// One label per line (first CSV field); arbitrary strings are mapped to
/// dense integer classes in order of first appearance.
inline std::vector<int> read_labels(std::istream& in) {
    std::vector<int> out;
    std::map<std::string, int> ids;
    std::string line;
    while (std::getline(in, line)) {
        auto body = csv::trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto field = csv::split(body).front();
        auto [it, inserted] = ids.emplace(field, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

} // namespace udemd
