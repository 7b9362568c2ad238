// Writes a synthetic image classification dataset as canonical IDX file
// pairs (train + test), for running the idx data path without external
// downloads.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "dflsim/dataset.hpp"

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic IDX image dataset"};

    std::string out_dir = ".";
    int classes = 10, train_per_class = 500, test_per_class = 100;
    int rows = 28, cols = 28;
    double signal = 0.8, noise = 0.35;
    std::uint64_t seed = 1;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--classes", classes, "number of classes");
    app.add_option("--train-per-class", train_per_class, "training samples per class");
    app.add_option("--test-per-class", test_per_class, "test samples per class");
    app.add_option("--rows", rows, "image rows");
    app.add_option("--cols", cols, "image cols");
    app.add_option("--signal", signal, "prototype intensity scale");
    app.add_option("--noise", noise, "pixel noise level");
    app.add_option("--seed", seed, "generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);

        const auto train = dflsim::make_synthetic_images(classes, train_per_class, rows, cols,
                                                         signal, noise, seed, /*variant=*/0);
        dflsim::save_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte",
                         train.pixels, rows, cols, train.labels);

        // same prototypes, fresh sample noise
        const auto test = dflsim::make_synthetic_images(classes, test_per_class, rows, cols, signal,
                                                        noise, seed, /*variant=*/1);
        dflsim::save_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte",
                         test.pixels, rows, cols, test.labels);

        std::cout << "wrote " << classes * train_per_class << " train / " << classes * test_per_class
                  << " test samples (" << rows << "x" << cols << ") to " << out_dir << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
