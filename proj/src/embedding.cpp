#include "embias/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "embias/parallel.hpp"

static_assert(std::endian::native == std::endian::little,
              "word2vec binary IO assumes a little-endian host");

namespace embias {

namespace {

bool all_ascii_digits(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

std::uint32_t parse_u32(std::string_view s, const char* what) {
    std::uint32_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v == 0) {
        throw ParseError(std::string("malformed header: bad ") + what + " \"" + std::string(s) + "\"");
    }
    return v;
}

void warn(std::vector<std::string>* warnings, std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
}

std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::uint32_t dim, std::vector<std::string> words,
                               std::vector<float> matrix)
    : dim_(dim), words_(std::move(words)), matrix_(std::move(matrix)) {
    if (dim_ == 0) throw InvalidArgument("EmbeddingTable: dim must be positive");
    if (matrix_.size() != static_cast<std::size_t>(words_.size()) * dim_) {
        throw InvalidArgument("EmbeddingTable: matrix size does not match count*dim");
    }
    index_.reserve(words_.size());
    for (std::uint32_t i = 0; i < words_.size(); ++i) {
        if (!index_.emplace(words_[i], i).second) {
            throw InvalidArgument("EmbeddingTable: duplicate token \"" + words_[i] + "\"");
        }
    }
    record_newlines_.assign(words_.size(), true);
}

std::optional<std::uint32_t> EmbeddingTable::find(std::string_view token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t EmbeddingTable::require(std::string_view token) const {
    const auto r = find(token);
    if (!r) throw MissingWordError(std::string(token));
    return *r;
}

void EmbeddingTable::set_record_newlines(std::vector<bool> flags) {
    if (flags.size() != words_.size()) {
        throw InvalidArgument("record_newlines: flag count does not match word count");
    }
    record_newlines_ = std::move(flags);
}

EmbeddingTable parse_word2vec_binary(std::istream& in, const ParseOptions& opts,
                                     std::vector<std::string>* warnings) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("malformed header: missing header line");
    const auto sp = header.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= header.size()) {
        throw ParseError("malformed header: expected \"<count> <dim>\"");
    }
    const std::string_view count_s = std::string_view(header).substr(0, sp);
    const std::string_view dim_s = std::string_view(header).substr(sp + 1);
    if (!all_ascii_digits(count_s) || !all_ascii_digits(dim_s)) {
        throw ParseError("malformed header: expected \"<count> <dim>\"");
    }
    const std::uint32_t file_count = parse_u32(count_s, "count");
    const std::uint32_t dim = parse_u32(dim_s, "dim");

    EmbeddingTable table;
    table.dim_ = dim;
    table.words_.reserve(file_count);
    table.matrix_.reserve(static_cast<std::size_t>(file_count) * dim);
    table.index_.reserve(file_count);
    table.record_newlines_.reserve(file_count);

    std::string token;
    std::vector<float> vec(dim);
    for (std::uint32_t rec = 0; rec < file_count; ++rec) {
        token.clear();
        for (;;) {
            const int c = in.get();
            if (c == std::char_traits<char>::eof()) {
                throw ParseError("truncated record " + std::to_string(rec) + ": EOF in token");
            }
            if (c == 0x20) break;
            token.push_back(static_cast<char>(c));
            if (token.size() > opts.max_token_bytes) {
                throw ParseError("corrupt stream: token exceeds " +
                                 std::to_string(opts.max_token_bytes) + " bytes at record " +
                                 std::to_string(rec));
            }
        }
        in.read(reinterpret_cast<char*>(vec.data()),
                static_cast<std::streamsize>(sizeof(float) * dim));
        if (static_cast<std::size_t>(in.gcount()) != sizeof(float) * dim) {
            throw ParseError("truncated record " + std::to_string(rec) + " (\"" + token +
                             "\"): EOF in vector");
        }
        bool newline = false;
        if (in.peek() == '\n') {
            in.get();
            newline = true;
        }
        if (!table.index_.emplace(token, static_cast<std::uint32_t>(table.words_.size())).second) {
            warn(warnings, "duplicate token \"" + token + "\" at record " + std::to_string(rec) +
                               "; keeping first occurrence");
            continue;
        }
        table.words_.push_back(token);
        table.matrix_.insert(table.matrix_.end(), vec.begin(), vec.end());
        table.record_newlines_.push_back(newline);
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        warn(warnings, "trailing bytes after last record were ignored");
    }
    return table;
}

EmbeddingTable parse_word2vec_text(std::istream& in, const ParseOptions& opts,
                                   std::vector<std::string>* warnings) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::uint32_t> header_count;
    std::uint32_t dim = 0;
    std::vector<std::string> words;
    std::vector<float> matrix;
    std::unordered_map<std::string, std::uint32_t, StringViewHash, std::equal_to<>> seen;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (line_no == 1 && fields.size() == 2 && all_ascii_digits(fields[0]) &&
            all_ascii_digits(fields[1])) {
            header_count = parse_u32(fields[0], "count");
            dim = parse_u32(fields[1], "dim");
            continue;
        }
        const std::string& token = fields.front();
        if (token.size() > opts.max_token_bytes) {
            throw ParseError("corrupt stream: token exceeds " +
                             std::to_string(opts.max_token_bytes) + " bytes at line " +
                             std::to_string(line_no));
        }
        const std::uint32_t row_dim = static_cast<std::uint32_t>(fields.size() - 1);
        if (row_dim == 0) {
            throw ParseError("line " + std::to_string(line_no) + ": no vector values");
        }
        if (dim == 0) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim) + " values, got " + std::to_string(row_dim));
        }
        std::vector<float> vec(dim);
        for (std::uint32_t j = 0; j < dim; ++j) {
            const std::string& f = fields[j + 1];
            const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[j]);
            if (ec != std::errc{} || p != f.data() + f.size()) {
                throw ParseError("line " + std::to_string(line_no) + ": non-numeric field \"" + f +
                                 "\"");
            }
        }
        if (!seen.emplace(token, static_cast<std::uint32_t>(words.size())).second) {
            warn(warnings, "duplicate token \"" + token + "\" at line " + std::to_string(line_no) +
                               "; keeping first occurrence");
            continue;
        }
        words.push_back(token);
        matrix.insert(matrix.end(), vec.begin(), vec.end());
    }
    if (words.empty()) throw ParseError("empty embedding stream");
    if (header_count && *header_count != words.size()) {
        warn(warnings, "header count " + std::to_string(*header_count) + " does not match " +
                           std::to_string(words.size()) + " parsed records");
    }
    return EmbeddingTable(dim, std::move(words), std::move(matrix));
}

void write_word2vec_binary(const EmbeddingTable& table, std::ostream& out) {
    out << table.count() << ' ' << table.dim() << '\n';
    for (std::uint32_t i = 0; i < table.count(); ++i) {
        out << table.word(i) << ' ';
        const auto r = table.row(i);
        out.write(reinterpret_cast<const char*>(r.data()),
                  static_cast<std::streamsize>(sizeof(float) * r.size()));
        if (table.record_newlines()[i]) out << '\n';
    }
}

void write_word2vec_text(const EmbeddingTable& table, std::ostream& out, bool header) {
    if (header) out << table.count() << ' ' << table.dim() << '\n';
    char buf[64];
    for (std::uint32_t i = 0; i < table.count(); ++i) {
        out << table.word(i);
        for (const float v : table.row(i)) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out << ' ';
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

EmbeddingTable load_embedding(const std::string& path, EmbeddingFormat format,
                              std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open embedding file: " + path);
    return format == EmbeddingFormat::Binary ? parse_word2vec_binary(in, {}, warnings)
                                             : parse_word2vec_text(in, {}, warnings);
}

NormalizedView::NormalizedView(const EmbeddingTable& table) : table_(&table) {
    const std::uint32_t dim = table.dim();
    unit_.resize(static_cast<std::size_t>(table.count()) * dim);
    zero_.assign(table.count(), false);
    for (std::uint32_t i = 0; i < table.count(); ++i) {
        const auto src = table.row(i);
        double ss = 0.0;
        for (const float v : src) ss += static_cast<double>(v) * v;
        const double norm = std::sqrt(ss);
        float* dst = unit_.data() + static_cast<std::size_t>(i) * dim;
        if (norm == 0.0) {
            zero_[i] = true;
            std::fill(dst, dst + dim, 0.0f);
        } else {
            for (std::uint32_t j = 0; j < dim; ++j) {
                dst[j] = static_cast<float>(src[j] / norm);
            }
        }
    }
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
    if (u.size() != v.size()) throw InvalidArgument("cosine: dimension mismatch");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double a = u[i], b = v[i];
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if (nu == 0.0 || nv == 0.0) throw InvalidArgument("cosine: zero vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

double cosine(const EmbeddingTable& table, std::string_view a, std::string_view b) {
    return cosine(table.lookup(a), table.lookup(b));
}

std::vector<double> row_norms(const EmbeddingTable& table, unsigned threads) {
    std::vector<double> norms(table.count());
    for_each_chunk(table.count(), 4096, threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto r = table.row(static_cast<std::uint32_t>(i));
            double ss = 0.0;
            for (const float v : r) ss += static_cast<double>(v) * v;
            norms[i] = std::sqrt(ss);
        }
    });
    return norms;
}

bool frequent_word_eligible(std::string_view token) noexcept {
    if (token.empty() || token.size() > 20) return false;
    for (const char c : token) {
        const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (!letter) return false;
    }
    return true;
}

std::vector<std::uint32_t> frequent_word_filter(const EmbeddingTable& table, std::uint32_t n) {
    if (n > table.count()) {
        throw InvalidArgument("frequent_word_filter: n=" + std::to_string(n) + " exceeds count=" +
                              std::to_string(table.count()));
    }
    std::vector<std::uint32_t> rows;
    rows.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (frequent_word_eligible(table.word(i))) rows.push_back(i);
    }
    return rows;
}

std::uint64_t table_checksum(const EmbeddingTable& table) {
    Fnv1a64 h;
    const std::uint32_t dims[2] = {table.count(), table.dim()};
    h.update(dims, sizeof(dims));
    for (const auto& w : table.words()) {
        h.update(w);
        h.update("\0", 1);
    }
    h.update(table.matrix().data(), table.matrix().size() * sizeof(float));
    return h.digest();
}

namespace {

constexpr char kCacheMagic[4] = {'E', 'M', 'B', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return static_cast<std::size_t>(in.gcount()) == sizeof(T);
}

}  // namespace

void write_embedding_cache(const EmbeddingCache& cache, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open cache file for writing: " + path);
    out.write(kCacheMagic, sizeof(kCacheMagic));
    put(out, kCacheVersion);
    put(out, cache.source_checksum);
    put(out, cache.count);
    put(out, cache.dim);
    const std::uint64_t n_norms = cache.norms.size();
    put(out, n_norms);
    out.write(reinterpret_cast<const char*>(cache.norms.data()),
              static_cast<std::streamsize>(n_norms * sizeof(double)));
    const std::uint64_t n_rows = cache.frequent_rows.size();
    put(out, n_rows);
    out.write(reinterpret_cast<const char*>(cache.frequent_rows.data()),
              static_cast<std::streamsize>(n_rows * sizeof(std::uint32_t)));
    if (!out) throw Error("failed writing cache file: " + path);
}

std::optional<EmbeddingCache> try_load_embedding_cache(const std::string& path,
                                                       std::uint64_t expected_source_checksum) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[4];
    in.read(magic, sizeof(magic));
    if (static_cast<std::size_t>(in.gcount()) != sizeof(magic) ||
        std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
        return std::nullopt;
    }
    std::uint32_t version = 0;
    if (!get(in, version) || version != kCacheVersion) return std::nullopt;
    EmbeddingCache cache;
    if (!get(in, cache.source_checksum)) return std::nullopt;
    if (cache.source_checksum != expected_source_checksum) return std::nullopt;
    if (!get(in, cache.count) || !get(in, cache.dim)) return std::nullopt;
    std::uint64_t n_norms = 0;
    if (!get(in, n_norms) || n_norms != cache.count) return std::nullopt;
    cache.norms.resize(n_norms);
    in.read(reinterpret_cast<char*>(cache.norms.data()),
            static_cast<std::streamsize>(n_norms * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != n_norms * sizeof(double)) return std::nullopt;
    std::uint64_t n_rows = 0;
    if (!get(in, n_rows) || n_rows > cache.count) return std::nullopt;
    cache.frequent_rows.resize(n_rows);
    in.read(reinterpret_cast<char*>(cache.frequent_rows.data()),
            static_cast<std::streamsize>(n_rows * sizeof(std::uint32_t)));
    if (static_cast<std::size_t>(in.gcount()) != n_rows * sizeof(std::uint32_t)) return std::nullopt;
    return cache;
}

}  // namespace embias
