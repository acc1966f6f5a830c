#include "alrf/dataset.hpp"

#include "alrf/errors.hpp"
#include "alrf/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace alrf {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    if (rows.empty()) throw ShapeError("dataset subset must be non-empty");
    const std::size_t d = feature_count();
    Dataset out;
    out.features = Tensor({rows.size(), d});
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) out.features(i, j) = features(rows[i], j);
        out.labels.push_back(labels.at(rows[i]));
    }
    out.classes = classes;
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

Tensor Dataset::one_hot(std::span<const std::size_t> rows) const {
    Tensor t({rows.size(), classes});
    for (std::size_t i = 0; i < rows.size(); ++i) t(i, labels.at(rows[i])) = 1.0;
    return t;
}

Tensor Dataset::one_hot() const {
    std::vector<std::size_t> all(size());
    std::iota(all.begin(), all.end(), 0);
    return one_hot(all);
}

Tensor Dataset::batch(std::span<const std::size_t> rows, const Tensor::Shape& sample_shape) const {
    const std::size_t d = feature_count();
    std::size_t volume = 1;
    for (auto s : sample_shape) volume *= s;
    if (volume != d)
        throw ShapeError("dataset rows have " + std::to_string(d) + " features, network expects " +
                         shape_string(sample_shape));
    Tensor::Shape shape{rows.size()};
    shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
    Tensor t(shape);
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(features.values().data() + rows[i] * d, d, t.values().data() + i * d);
    return t;
}

DataSplits split_dataset(const Dataset& data, double train, double validation, double test, std::uint64_t seed) {
    if (!(train > 0.0 && validation > 0.0 && test > 0.0) || std::abs(train + validation + test - 1.0) > 1e-9)
        throw DomainError("split fractions must be positive and sum to 1");
    const std::size_t n = data.size();
    const auto n_train = static_cast<std::size_t>(std::llround(train * double(n)));
    const auto n_val = static_cast<std::size_t>(std::llround(validation * double(n)));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
        throw DomainError("dataset of " + std::to_string(n) + " samples is too small for the requested split");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::span<const std::size_t> all(order);
    return DataSplits{data.subset(all.subspan(0, n_train)), data.subset(all.subspan(n_train, n_val)),
                      data.subset(all.subspan(n_train + n_val))};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    for (auto& f : fields) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return fields;
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column, bool normalize) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw ParseError("empty CSV file", line_no);

    const auto label_it = std::find(header.begin(), header.end(), label_column);
    if (label_it == header.end()) throw MissingLabel("label column '" + label_column + "' not found in header");
    const std::size_t label_idx = std::size_t(label_it - header.begin());

    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        if (fields[label_idx].empty()) throw MissingLabel("empty label at line " + std::to_string(line_no));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_idx) continue;
            double v = 0.0;
            if (!parse_number(fields[j], v))
                throw ParseError("non-numeric value '" + fields[j] + "' in column '" + header[j] + "'", line_no);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
        raw_labels.push_back(fields[label_idx]);
    }
    if (rows.empty()) throw ParseError("CSV has no data rows", line_no);
    if (header.size() < 2) throw ParseError("CSV needs at least one feature column", 1);

    Dataset data;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != label_idx) data.feature_names.push_back(header[j]);

    std::map<std::string, std::size_t> index;
    for (const auto& l : raw_labels) index.emplace(l, 0);
    for (auto& [name, idx] : index) {
        idx = data.class_names.size();
        data.class_names.push_back(name);
    }
    data.classes = data.class_names.size();

    const std::size_t n = rows.size(), d = data.feature_names.size();
    data.features = Tensor({n, d});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
        data.labels.push_back(index.at(raw_labels[i]));
    }

    if (normalize) {
        for (std::size_t j = 0; j < d; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += data.features(i, j);
            mean /= double(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double c = data.features(i, j) - mean;
                var += c * c;
            }
            const double sigma = std::max(std::sqrt(var / double(n)), 1e-12);
            for (std::size_t i = 0; i < n; ++i) data.features(i, j) = (data.features(i, j) - mean) / sigma;
        }
    }
    return data;
}

Dataset make_noisy_surface_dataset(std::size_t n, double noise, std::uint64_t seed) {
    if (n < 10) throw DomainError("surface dataset needs at least 10 samples");
    if (!(noise >= 0.0 && noise < 0.5)) throw DomainError("label noise must lie in [0, 0.5)");

    // Corner blobs; class = 1 when the corner's coordinates have opposite signs.
    constexpr double c = kSurfaceBlobCenter;
    const double centers[4][2] = {{-c, -c}, {c, c}, {-c, c}, {c, -c}};
    const std::size_t region_class[4] = {0, 0, 1, 1};

    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, kSurfaceBlobSigma);
    Dataset data;
    data.features = Tensor({n, 2});
    data.labels.resize(n);
    data.classes = 2;
    data.feature_names = {"x1", "x2"};
    data.class_names = {"0", "1"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t blob = i % 4;
        data.features(i, 0) = centers[blob][0] + gauss(rng);
        data.features(i, 1) = centers[blob][1] + gauss(rng);
        data.labels[i] = region_class[blob];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (uniform01(rng) < noise) data.labels[i] = 1 - data.labels[i];
    return data;
}

} // namespace alrf
