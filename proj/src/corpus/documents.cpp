// SPDX-License-Identifier: Apache-2.0
#include "codecorpus/corpus/documents.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace codecorpus::corpus {

namespace fs = std::filesystem;

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    out << text;
    if (!out) throw DataError(fmt::format("write failed for {}", path.string()));
}

CorpusFormat detect_format(const fs::path& input) {
    if (fs::is_directory(input)) return CorpusFormat::Directory;
    if (input.extension() == ".jsonl") return CorpusFormat::Jsonl;
    throw DataError(fmt::format("{} is neither a directory nor a .jsonl file", input.string()));
}

namespace {

std::vector<Document> read_directory(const fs::path& root) {
    std::vector<Document> docs;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::string id = fs::relative(entry.path(), root).generic_string();
        if (id == kManifestName) continue;
        docs.push_back({std::move(id), read_text_file(entry.path())});
    }
    std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
    return docs;
}

std::vector<Document> read_jsonl(const fs::path& path) {
    std::istringstream in(read_text_file(path));
    std::vector<Document> docs;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
        }
        if (!record.is_object() || !record.contains("text") || !record["text"].is_string())
            throw DataError(fmt::format("{}:{}: record needs a string field 'text'", path.string(), line_no));
        std::string id;
        if (!record.contains("id")) {
            throw DataError(fmt::format("{}:{}: record needs an 'id'", path.string(), line_no));
        } else if (record["id"].is_string()) {
            id = record["id"].get<std::string>();
        } else if (record["id"].is_number_integer()) {
            id = record["id"].dump();
        } else {
            throw DataError(fmt::format("{}:{}: 'id' must be a string or an integer", path.string(), line_no));
        }
        if (!ids.insert(id).second) throw DataError(fmt::format("{}:{}: duplicate id '{}'", path.string(), line_no, id));
        docs.push_back({std::move(id), record["text"].get<std::string>()});
    }
    return docs;
}

}  // namespace

std::vector<Document> read_corpus(const fs::path& input) {
    if (!fs::exists(input)) throw DataError(fmt::format("{} does not exist", input.string()));
    return detect_format(input) == CorpusFormat::Directory ? read_directory(input) : read_jsonl(input);
}

void write_corpus(const fs::path& output, CorpusFormat format, const std::vector<Document>& docs) {
    if (format == CorpusFormat::Directory) {
        fs::create_directories(output);
        for (const auto& doc : docs) {
            fs::path rel(doc.id);
            bool escapes = std::any_of(rel.begin(), rel.end(), [](const fs::path& part) { return part == ".."; });
            if (rel.is_absolute() || rel.empty() || escapes)
                throw DataError(fmt::format("document id '{}' is not a safe relative path", doc.id));
            write_text_file(output / rel, doc.text);
        }
        return;
    }
    std::string out;
    for (const auto& doc : docs) {
        nlohmann::ordered_json record = {{"id", doc.id}, {"text", doc.text}};
        try {
            out += record.dump();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(fmt::format("document '{}' is not valid UTF-8: {}", doc.id, e.what()));
        }
        out += '\n';
    }
    write_text_file(output, out);
}

}  // namespace codecorpus::corpus
