// Writes the synthetic paraphrase corpus: pairs TSV, word vectors and a
// matching training config.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "medqa/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic paraphrase corpus"};
  std::string out_dir = ".";
  medqa::ToyCorpusOptions opt;
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--pairs", opt.n_pairs, "number of pairs (even)");
  app.add_option("--dim", opt.dim, "word vector dimension");
  app.add_option("--seed", opt.seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    const auto toy = medqa::make_toy_corpus(opt);

    std::ofstream pairs(dir / "toy_pairs.tsv");
    medqa::write_pairs(toy.rows, pairs);
    std::ofstream vectors(dir / "toy_vectors.txt");
    medqa::write_vectors(toy.table, vectors);
    std::ofstream config(dir / "toy_train.conf");
    config << "# Desk-scale settings for the synthetic corpus.\n"
           << "batch_size = 32\nepochs = 50\nhidden = 16\n"
           << "embedding_dim = " << opt.dim << "\nmax_seq_length = 10\n"
           << "learning_rate = 0.001\nseed = 1\ntrain_fraction = 0.9\n";
    if (!pairs || !vectors || !config) throw std::runtime_error("write failed in " + out_dir);
    std::cout << "wrote " << toy.rows.size() << " pairs and " << toy.table.size()
              << " vectors to " << out_dir << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
