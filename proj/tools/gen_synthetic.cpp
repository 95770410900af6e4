// Writes a synthetic labeled corpus as comments-jsonl.
#include <iostream>

#include <CLI11.hpp>

#include "metacomment/corpus.hpp"
#include "metacomment/synthetic.hpp"

int main(int argc, char** argv) {
    metacomment::synthetic::Options opt;
    std::string out_path;
    CLI::App app{"Generate a synthetic comment corpus", "gen_synthetic"};
    app.add_option("--out", out_path, "Output comments-jsonl file")->required();
    app.add_option("--n", opt.n_comments, "Number of comments")->capture_default_str();
    app.add_option("--meta-share", opt.meta_share, "Share of meta comments")->capture_default_str();
    app.add_option("--multi-share", opt.multi_share, "Share of meta comments with two addressees")->capture_default_str();
    app.add_option("--seed", opt.seed, "Seed")->capture_default_str();
    app.add_option("--id-prefix", opt.id_prefix, "Comment id prefix")->capture_default_str();
    app.add_option("--source-tag", opt.source_tag, "Dataset tag")->capture_default_str();
    app.add_option("--dialect", opt.dialect, "Vocabulary half, 0 or 1")->check(CLI::Range(0, 1))->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    try {
        metacomment::corpus::save_dataset(metacomment::synthetic::generate(opt), out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
