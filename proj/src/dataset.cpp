#include "pacodi/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pacodi {

namespace {
constexpr double kStdFloor = 1e-8;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

Dataset gen_sines(int n_samples, int length, int channels, Rng& rng) {
    if (n_samples <= 0 || length < 2 || channels <= 0)
        throw InvalidInputError("gen_sines: sizes must be positive (length >= 2)");
    Dataset ds;
    ds.samples.reserve(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        TemporalSeries x(length, channels);
        for (int d = 0; d < channels; ++d) {
            const double f = rng.uniform(0.02, 0.1);
            const double phi = rng.uniform(0.0, kTwoPi);
            for (int n = 0; n < length; ++n) x.values(n, d) = std::sin(kTwoPi * f * n + phi);
        }
        ds.samples.push_back(std::move(x));
    }
    return ds;
}

Dataset gen_single_tone(int n_samples, int length, int channels, int bin, Rng& rng) {
    if (n_samples <= 0 || length < 2 || channels <= 0)
        throw InvalidInputError("gen_single_tone: sizes must be positive");
    if (bin < 1 || bin > length / 2)
        throw InvalidInputError("gen_single_tone: bin must be in [1, L/2]");
    Dataset ds;
    ds.samples.reserve(n_samples);
    const double f = static_cast<double>(bin) / length;
    for (int s = 0; s < n_samples; ++s) {
        TemporalSeries x(length, channels);
        for (int d = 0; d < channels; ++d) {
            const double phi = rng.uniform(0.0, kTwoPi);
            for (int n = 0; n < length; ++n) x.values(n, d) = std::sin(kTwoPi * f * n + phi);
        }
        ds.samples.push_back(std::move(x));
    }
    return ds;
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    errno = 0;
    out = std::strtod(begin, &end);
    if (end == begin || errno == ERANGE) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0';
}

} // namespace

Dataset ingest_csv(const std::string& path, int length, int stride, bool header_row) {
    if (length < 2) throw InvalidInputError("ingest_csv: window length must be >= 2");
    if (stride < 1) throw InvalidInputError("ingest_csv: stride must be >= 1");
    std::ifstream in(path);
    if (!in) throw InvalidInputError("ingest_csv: cannot open '" + path + "'");

    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    size_t n_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (header_row && rows.empty() && n_cols == 0) {
            header_row = false; // consume exactly one header line
            continue;
        }
        const auto cells = split_csv_row(line);
        if (n_cols == 0) n_cols = cells.size();
        if (cells.size() != n_cols) {
            std::ostringstream oss;
            oss << "ingest_csv: line " << line_no << ": expected " << n_cols << " columns, got "
                << cells.size();
            throw InvalidInputError(oss.str());
        }
        std::vector<double> row(n_cols);
        for (size_t c = 0; c < n_cols; ++c) {
            if (!parse_double(cells[c], row[c])) {
                std::ostringstream oss;
                oss << "ingest_csv: line " << line_no << ": column " << c + 1
                    << " is not numeric ('" << cells[c] << "')";
                throw InvalidInputError(oss.str());
            }
        }
        rows.push_back(std::move(row));
    }
    const int n_rows = static_cast<int>(rows.size());
    if (n_rows < length) {
        std::ostringstream oss;
        oss << "ingest_csv: file has " << n_rows << " data rows, fewer than window length "
            << length;
        throw InvalidInputError(oss.str());
    }

    Dataset ds;
    const int d = static_cast<int>(n_cols);
    for (int start = 0; start + length <= n_rows; start += stride) {
        TemporalSeries x(length, d);
        for (int n = 0; n < length; ++n)
            for (int c = 0; c < d; ++c) x.values(n, c) = rows[start + n][c];
        ds.samples.push_back(std::move(x));
    }
    return ds;
}

void normalize(Dataset& dataset) {
    if (dataset.samples.empty()) throw InvalidInputError("normalize: empty dataset");
    if (dataset.normalized) throw InvalidInputError("normalize: dataset already normalized");
    const int n = static_cast<int>(dataset.samples.size());
    const int length = dataset.length();
    const int channels = dataset.channels();
    for (const auto& s : dataset.samples)
        if (s.length() != length || s.channels() != channels)
            throw InvalidInputError("normalize: samples must share one shape");

    NormalizationRecord rec;
    rec.channel_mean.assign(channels, 0.0);
    rec.channel_std.assign(channels, 0.0);
    rec.std_floored.assign(channels, false);

    const double count = static_cast<double>(n) * length;
    for (const auto& s : dataset.samples)
        for (int t = 0; t < length; ++t)
            for (int d = 0; d < channels; ++d) rec.channel_mean[d] += s.values(t, d) / count;
    for (const auto& s : dataset.samples)
        for (int t = 0; t < length; ++t)
            for (int d = 0; d < channels; ++d) {
                const double diff = s.values(t, d) - rec.channel_mean[d];
                rec.channel_std[d] += diff * diff / count;
            }
    for (int d = 0; d < channels; ++d) {
        rec.channel_std[d] = std::sqrt(rec.channel_std[d]);
        if (rec.channel_std[d] < kStdFloor) {
            rec.channel_std[d] = kStdFloor;
            rec.std_floored[d] = true;
        }
    }

    rec.sample_means = Mat(n, channels);
    for (int s = 0; s < n; ++s) {
        TemporalSeries& x = dataset.samples[s];
        for (int t = 0; t < length; ++t)
            for (int d = 0; d < channels; ++d)
                x.values(t, d) = (x.values(t, d) - rec.channel_mean[d]) / rec.channel_std[d];
        for (int d = 0; d < channels; ++d) {
            double mean = 0.0;
            for (int t = 0; t < length; ++t) mean += x.values(t, d);
            mean /= length;
            rec.sample_means(s, d) = mean;
            for (int t = 0; t < length; ++t) x.values(t, d) -= mean;
        }
    }
    dataset.norm = std::move(rec);
    dataset.normalized = true;
}

TemporalSeries denormalize(const TemporalSeries& series, const NormalizationRecord& norm,
                           const std::vector<double>& sample_mean) {
    const int channels = series.channels();
    if (static_cast<int>(sample_mean.size()) != channels ||
        static_cast<int>(norm.channel_mean.size()) != channels)
        throw InvalidInputError("denormalize: channel count mismatch");
    TemporalSeries out(series.length(), channels);
    for (int t = 0; t < series.length(); ++t)
        for (int d = 0; d < channels; ++d)
            out.values(t, d) =
                (series.values(t, d) + sample_mean[d]) * norm.channel_std[d] +
                norm.channel_mean[d];
    return out;
}

Dataset denormalize_stored(const Dataset& dataset) {
    if (!dataset.normalized) throw InvalidInputError("denormalize_stored: dataset not normalized");
    Dataset out;
    out.samples.reserve(dataset.samples.size());
    const int channels = dataset.channels();
    for (size_t s = 0; s < dataset.samples.size(); ++s) {
        std::vector<double> mean(channels);
        for (int d = 0; d < channels; ++d) mean[d] = dataset.norm.sample_means(int(s), d);
        out.samples.push_back(denormalize(dataset.samples[s], dataset.norm, mean));
    }
    return out;
}

std::vector<double> draw_sample_mean(const NormalizationRecord& norm, Rng& rng) {
    if (norm.sample_means.rows == 0)
        return std::vector<double>(norm.channel_mean.size(), 0.0);
    const int idx = std::min(static_cast<int>(rng.uniform() * norm.sample_means.rows),
                             norm.sample_means.rows - 1);
    std::vector<double> mean(norm.sample_means.cols);
    for (int d = 0; d < norm.sample_means.cols; ++d) mean[d] = norm.sample_means(idx, d);
    return mean;
}

void write_samples_csv(const std::string& path, const std::vector<TemporalSeries>& samples,
                       const std::string& command_line, const std::string& note) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw InvalidInputError("write_samples_csv: cannot open '" + tmp + "'");
        out << "# pacodi-samples v1\n";
        out << "# cmd: " << command_line << "\n";
        if (!note.empty()) out << "# " << note << "\n";
        const int channels = samples.empty() ? 0 : samples.front().channels();
        out << "sample,step";
        for (int d = 0; d < channels; ++d) out << ",ch" << d;
        out << "\n";
        out.precision(17);
        for (size_t s = 0; s < samples.size(); ++s)
            for (int t = 0; t < samples[s].length(); ++t) {
                out << s << "," << t;
                for (int d = 0; d < channels; ++d) out << "," << samples[s].values(t, d);
                out << "\n";
            }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_samples_csv: rename failed: " +
                                 std::string(std::strerror(errno)));
}

std::vector<TemporalSeries> read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("read_samples_csv: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<std::vector<std::vector<double>>> rows_by_sample;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("sample,step", 0) != 0)
                throw InvalidInputError("read_samples_csv: missing 'sample,step,...' header");
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_row(line);
        if (cells.size() < 3) {
            std::ostringstream oss;
            oss << "read_samples_csv: line " << line_no << ": too few columns";
            throw InvalidInputError(oss.str());
        }
        double sample_idx = 0.0, step = 0.0;
        if (!parse_double(cells[0], sample_idx) || !parse_double(cells[1], step)) {
            std::ostringstream oss;
            oss << "read_samples_csv: line " << line_no << ": bad sample/step index";
            throw InvalidInputError(oss.str());
        }
        const size_t s = static_cast<size_t>(sample_idx);
        if (rows_by_sample.size() <= s) rows_by_sample.resize(s + 1);
        std::vector<double> row(cells.size() - 2);
        for (size_t c = 2; c < cells.size(); ++c) {
            if (!parse_double(cells[c], row[c - 2])) {
                std::ostringstream oss;
                oss << "read_samples_csv: line " << line_no << ": column " << c + 1
                    << " is not numeric";
                throw InvalidInputError(oss.str());
            }
        }
        rows_by_sample[s].push_back(std::move(row));
    }
    std::vector<TemporalSeries> out;
    for (auto& rows : rows_by_sample) {
        if (rows.empty()) throw InvalidInputError("read_samples_csv: gap in sample indices");
        TemporalSeries x(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
        for (size_t t = 0; t < rows.size(); ++t)
            for (size_t d = 0; d < rows[t].size(); ++d)
                x.values(static_cast<int>(t), static_cast<int>(d)) = rows[t][d];
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace pacodi
