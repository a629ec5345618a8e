// Writes a synthetic DailyDialog-format corpus and matching word vectors.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dicoh/synthetic.hpp"

namespace {

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic DailyDialog-format corpus", "dicoh-toydata"};
  std::string out;
  dicoh::SyntheticCorpusOptions options;
  std::size_t dim = 300;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--dialogues", options.dialogues, "Number of dialogues");
  app.add_option("--seed", options.seed, "Random seed");
  app.add_option("--dim", dim, "Word vector width");
  CLI11_PARSE(app, argc, argv);
  try {
    std::filesystem::create_directories(out);
    const auto corpus = dicoh::synthetic_dailydialog(options);
    write(std::filesystem::path(out) / "dialogues_text.txt", corpus.text);
    write(std::filesystem::path(out) / "dialogues_act.txt", corpus.acts);
    write(std::filesystem::path(out) / "vectors.txt",
          dicoh::synthetic_embeddings(dicoh::synthetic_lexicon(), dim, options.seed));
  } catch (const std::exception& e) {
    std::cerr << "dicoh-toydata: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << options.dialogues << " dialogues to " << out << "\n";
  return 0;
}
