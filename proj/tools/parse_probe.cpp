// SPDX-License-Identifier: Apache-2.0
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "codecorpus/common/hash.hpp"
#include "codecorpus/syntax/analysis.hpp"
#include "codecorpus/syntax/parser.hpp"
#include "codecorpus/syntax/unparse.hpp"
#include "codecorpus/tokenizer/bpe.hpp"
#include "codecorpus/transforms/transforms.hpp"

using namespace codecorpus;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: parse_probe MODE FILE...  (bpe mode: parse_probe bpe VOCAB MERGES FILE...)\n";
        return 1;
    }
    std::string mode = argv[1];
    int first = 2;
    std::optional<tokenizer::BpeVocabulary> vocab;
    if (mode == "bpe") {
        if (argc < 4) {
            std::cerr << "bpe mode needs VOCAB and MERGES\n";
            return 1;
        }
        vocab = tokenizer::load_vocabulary(argv[2], argv[3]);
        first = 4;
    }
    for (int i = first; i < argc; ++i) {
        std::ifstream in(argv[i], std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        if (mode == "bpe") {
            for (auto id : vocab->encode(ss.str())) std::cout << id << " ";
            std::cout << "\n";
            continue;
        }
        auto r = syntax::parse(ss.str());
        if (!r) {
            std::cout << "ERR " << argv[i] << "\n";
            continue;
        }
        const auto& root = r.tree().root;
        if (mode == "dump") { std::cout << syntax::dump(root) << "\n"; continue; }
        if (mode == "unparse") { std::cout << syntax::unparse(root) << "\n"; continue; }
        if (mode == "ids") {
            for (const auto& o : transforms::collect_identifiers(r.tree()))
                std::cout << o.name << ":" << transforms::category_name(o.category) << "\n";
            continue;
        }
        if (mode.rfind("raw", 0) == 0 || mode.rfind("cf", 0) == 0) {
            auto colon = mode.find(':');
            transforms::TransformSpec spec{transforms::parse_mode(mode.substr(0, colon)),
                                           colon == std::string::npos ? 0 : std::stoull(mode.substr(colon + 1))};
            std::cout << syntax::unparse(transforms::apply(spec, r.tree()).root) << "\n";
            continue;
        }
        if (mode.rfind("sweep", 0) == 0) {
            std::uint64_t seeds = std::stoull(mode.substr(6));
            for (auto m : {transforms::TransformMode::CommentFree, transforms::TransformMode::CommentFreeScrambled,
                           transforms::TransformMode::CommentFreeRandomized}) {
                for (std::uint64_t seed = 0; seed < seeds; ++seed) {
                    auto t = transforms::apply({m, seed}, r.tree());
                    std::string text;
                    try { text = syntax::unparse(t.root); } catch (const std::exception& e) {
                        std::cout << "UNPARSE " << argv[i] << " " << transforms::mode_name(m) << " " << seed << " " << e.what() << "\n";
                        continue;
                    }
                    auto again = syntax::parse(text);
                    if (!again) {
                        std::cout << "REPARSE " << argv[i] << " " << transforms::mode_name(m) << " " << seed << " "
                                  << again.failure().message << " @" << again.failure().line << "\n";
                    } else if (!syntax::kind_isomorphic(again.tree().root, t.root)) {
                        std::cout << "SHAPE " << argv[i] << " " << transforms::mode_name(m) << " " << seed << "\n";
                    }
                }
            }
            continue;
        }
        std::string u;
        try { u = syntax::unparse(root); } catch (const std::exception& e) { u = "!"; }
        std::cout << "OK " << argv[i] << " " << syntax::depth(root) << " " << to_hex(fnv1a64(syntax::dump(root)))
                  << " " << to_hex(fnv1a64(u)) << "\n";
        auto inv = syntax::check_invariants(root);
        if (!inv.empty()) std::cout << "INVARIANT " << argv[i] << " " << inv << "\n";
    }
}
