#include "dflsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>

#include "dflsim/errors.hpp"
#include "dflsim/rng.hpp"

namespace dflsim {
namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw DataFormatError("IDX: truncated file while reading " + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

Dataset::Dataset(std::vector<double> features, int feature_dim, std::vector<int> labels,
                 int n_classes, Split split)
    : features_(std::move(features)), labels_(std::move(labels)), feature_dim_(feature_dim),
      n_classes_(n_classes), split_(split) {
    if (feature_dim_ <= 0) throw DataFormatError("Dataset: feature_dim must be positive");
    if (features_.size() != labels_.size() * static_cast<std::size_t>(feature_dim_)) {
        throw DataFormatError("Dataset: feature matrix size does not match label count");
    }
    for (int y : labels_) {
        if (y < 0 || y >= n_classes_) {
            throw DataFormatError("Dataset: label " + std::to_string(y) + " outside [0, " +
                                  std::to_string(n_classes_) + ")");
        }
    }
    for (double v : features_) {
        if (!std::isfinite(v)) throw DataFormatError("Dataset: non-finite feature value");
    }
}

TrainTest make_synthetic(int classes, int per_class, int dim, double sep, std::uint64_t seed) {
    if (classes < 2) throw DataFormatError("make_synthetic: need at least 2 classes");
    if (per_class < 1) throw DataFormatError("make_synthetic: per_class must be >= 1");
    if (!(sep > 0.0)) throw DataFormatError("make_synthetic: sep must be positive");
    if (classes > 2 * dim) {
        throw DataFormatError("make_synthetic: " + std::to_string(classes) +
                              " classes need dim >= " + std::to_string((classes + 1) / 2));
    }

    // class c mean: +/- (sep/sqrt(2)) along axis (c mod dim); any two means
    // are at least `sep` apart
    const double radius = sep / std::sqrt(2.0);
    std::vector<double> train_feat, test_feat;
    std::vector<int> train_lab, test_lab;
    const int train_per_class = std::max(1, static_cast<int>(per_class * 0.8));

    for (int c = 0; c < classes; ++c) {
        SeededRng rng(seed, StreamPurpose::DataGen, static_cast<std::uint64_t>(c));
        const int axis = c % dim;
        const double sign = (c / dim) % 2 == 0 ? 1.0 : -1.0;
        for (int s = 0; s < per_class; ++s) {
            const bool is_train = s < train_per_class;
            auto& feat = is_train ? train_feat : test_feat;
            auto& lab = is_train ? train_lab : test_lab;
            for (int k = 0; k < dim; ++k) {
                double v = rng.normal();
                if (k == axis) v += sign * radius;
                feat.push_back(v);
            }
            lab.push_back(c);
        }
    }

    return {Dataset(std::move(train_feat), dim, std::move(train_lab), classes, Split::Train),
            Dataset(std::move(test_feat), dim, std::move(test_lab), classes, Split::Test)};
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, int limit, Split split) {
    if (limit <= 0) {
        throw DataFormatError("load_idx: limit must be positive (empty dataset requested)");
    }

    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw DataFormatError("load_idx: cannot open " + images_path.string());
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw DataFormatError("load_idx: cannot open " + labels_path.string());

    const std::uint32_t img_magic = read_u32_be(img, "image magic");
    if (img_magic != kIdxImagesMagic) {
        throw DataFormatError("load_idx: bad image magic in " + images_path.string());
    }
    const std::uint32_t lab_magic = read_u32_be(lab, "label magic");
    if (lab_magic != kIdxLabelsMagic) {
        throw DataFormatError("load_idx: bad label magic in " + labels_path.string());
    }

    const std::uint32_t n_images = read_u32_be(img, "image count");
    const std::uint32_t rows = read_u32_be(img, "rows");
    const std::uint32_t cols = read_u32_be(img, "cols");
    const std::uint32_t n_labels = read_u32_be(lab, "label count");
    if (n_images != n_labels) {
        throw DataFormatError("load_idx: image count " + std::to_string(n_images) +
                              " != label count " + std::to_string(n_labels));
    }
    if (static_cast<std::uint32_t>(limit) > n_images) {
        throw DataFormatError("load_idx: limit " + std::to_string(limit) + " exceeds sample count " +
                              std::to_string(n_images));
    }

    const int n = limit;
    const int d = static_cast<int>(rows * cols);
    std::vector<std::uint8_t> pixel_buf(static_cast<std::size_t>(n) * d);
    img.read(reinterpret_cast<char*>(pixel_buf.data()), static_cast<std::streamsize>(pixel_buf.size()));
    if (!img) throw DataFormatError("load_idx: truncated image data in " + images_path.string());

    std::vector<std::uint8_t> label_buf(static_cast<std::size_t>(n));
    lab.read(reinterpret_cast<char*>(label_buf.data()), static_cast<std::streamsize>(label_buf.size()));
    if (!lab) throw DataFormatError("load_idx: truncated label data in " + labels_path.string());

    std::vector<double> features(pixel_buf.size());
    for (std::size_t i = 0; i < pixel_buf.size(); ++i) {
        features[i] = pixel_buf[i] / 255.0;
    }
    std::vector<int> labels(label_buf.begin(), label_buf.end());
    const int n_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    return Dataset(std::move(features), d, std::move(labels), n_classes, split);
}

SyntheticImages make_synthetic_images(int classes, int per_class, int rows, int cols,
                                      double signal, double noise, std::uint64_t seed,
                                      int variant) {
    if (classes < 2 || per_class < 1 || rows < 1 || cols < 1) {
        throw DataFormatError("make_synthetic_images: bad shape arguments");
    }
    if (variant < 0) throw DataFormatError("make_synthetic_images: variant must be >= 0");
    const int d = rows * cols;
    std::vector<std::vector<double>> prototypes(static_cast<std::size_t>(classes));
    for (int c = 0; c < classes; ++c) {
        SeededRng rng(seed, StreamPurpose::DataGen, static_cast<std::uint64_t>(c), 1);
        auto& proto = prototypes[static_cast<std::size_t>(c)];
        proto.resize(static_cast<std::size_t>(d));
        for (double& p : proto) p = rng.uniform();
    }

    SyntheticImages out;
    out.rows = rows;
    out.cols = cols;
    out.pixels.reserve(static_cast<std::size_t>(classes) * per_class * d);
    out.labels.reserve(static_cast<std::size_t>(classes) * per_class);

    std::vector<SeededRng> streams;
    for (int c = 0; c < classes; ++c) {
        streams.emplace_back(seed, StreamPurpose::DataGen, static_cast<std::uint64_t>(c),
                             2 + static_cast<std::uint64_t>(variant));
    }
    for (int s = 0; s < per_class; ++s) {
        for (int c = 0; c < classes; ++c) {
            auto& rng = streams[static_cast<std::size_t>(c)];
            const auto& proto = prototypes[static_cast<std::size_t>(c)];
            const double intensity = rng.uniform(0.7, 1.3);
            for (int k = 0; k < d; ++k) {
                const double v = signal * intensity * proto[static_cast<std::size_t>(k)] +
                                 noise * rng.normal();
                const double clamped = std::min(1.0, std::max(0.0, v));
                out.pixels.push_back(static_cast<std::uint8_t>(std::lround(clamped * 255.0)));
            }
            out.labels.push_back(static_cast<std::uint8_t>(c));
        }
    }
    return out;
}

void save_idx(const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path,
              const std::vector<std::uint8_t>& pixels, int rows, int cols,
              const std::vector<std::uint8_t>& labels) {
    const std::size_t d = static_cast<std::size_t>(rows) * cols;
    if (d == 0 || pixels.size() != labels.size() * d) {
        throw DataFormatError("save_idx: pixel buffer does not match rows*cols*labels");
    }
    std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
    if (!img) throw DataFormatError("save_idx: cannot open " + images_path.string());
    write_u32_be(img, kIdxImagesMagic);
    write_u32_be(img, static_cast<std::uint32_t>(labels.size()));
    write_u32_be(img, static_cast<std::uint32_t>(rows));
    write_u32_be(img, static_cast<std::uint32_t>(cols));
    img.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));

    std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
    if (!lab) throw DataFormatError("save_idx: cannot open " + labels_path.string());
    write_u32_be(lab, kIdxLabelsMagic);
    write_u32_be(lab, static_cast<std::uint32_t>(labels.size()));
    lab.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

} // namespace dflsim
