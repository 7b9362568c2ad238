#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dflsim {

enum class Split { Train, Test };

// Dense feature matrix with one integer class label per row.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<double> features, int feature_dim, std::vector<int> labels,
            int n_classes, Split split);

    int size() const { return static_cast<int>(labels_.size()); }
    int feature_dim() const { return feature_dim_; }
    int n_classes() const { return n_classes_; }
    Split split() const { return split_; }

    std::span<const double> sample(int i) const {
        return {features_.data() + static_cast<std::size_t>(i) * feature_dim_,
                static_cast<std::size_t>(feature_dim_)};
    }
    int label(int i) const { return labels_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& features() const { return features_; }
    const std::vector<int>& labels() const { return labels_; }

private:
    std::vector<double> features_;
    std::vector<int> labels_;
    int feature_dim_ = 0;
    int n_classes_ = 0;
    Split split_ = Split::Train;
};

struct TrainTest {
    Dataset train;
    Dataset test;
};

// Gaussian blobs: class means sit `sep` apart along signed coordinate axes,
// unit-variance noise. The first 80% of each class (in generation order)
// forms the train split. Identical seeds give byte-identical datasets.
TrainTest make_synthetic(int classes, int per_class, int dim, double sep, std::uint64_t seed);

// Reads a big-endian IDX image/label file pair; pixels are scaled to [0,1].
// limit > 0 keeps only the first `limit` samples and must not exceed the
// file's count.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path, int limit, Split split);

// Writes a canonical IDX pair (magic 0x803 / 0x801) from raw 8-bit pixels.
void save_idx(const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path,
              const std::vector<std::uint8_t>& pixels, int rows, int cols,
              const std::vector<std::uint8_t>& labels);

struct SyntheticImages {
    std::vector<std::uint8_t> pixels;
    std::vector<std::uint8_t> labels;
    int rows = 0;
    int cols = 0;
};

// Image-like classification data for the IDX pipeline when no external
// dataset is on disk: each class gets a random dense prototype image and
// samples are the prototype under a random intensity plus pixel noise.
// Classes are interleaved so any prefix of the file stays balanced.
// `variant` selects an independent sample stream over the same prototypes
// (0 for a train split, 1 for a matching test split).
SyntheticImages make_synthetic_images(int classes, int per_class, int rows, int cols,
                                      double signal, double noise, std::uint64_t seed,
                                      int variant = 0);

} // namespace dflsim
