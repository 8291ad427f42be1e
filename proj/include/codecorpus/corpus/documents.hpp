// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace codecorpus::corpus {

struct Document {
    std::string id;
    std::string text;

    friend bool operator==(const Document&, const Document&) = default;
};

enum class CorpusFormat { Directory, Jsonl };

// Bad input data (unreadable file, malformed JSONL record).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kManifestName = "manifest.json";

/// A directory is read recursively; each regular file is one document whose
/// id is its path relative to the directory ("pkg/mod.py"), in byte order
/// of the ids. A top-level manifest.json is not a document. A file ending
/// in ".jsonl" holds one {"id": ..., "text": ...} record per line; numeric
/// ids are kept as their decimal text.
std::vector<Document> read_corpus(const std::filesystem::path& input);
CorpusFormat detect_format(const std::filesystem::path& input);

/// Writes documents in the given format. Directory output recreates the
/// relative paths under `output`; JSONL output writes one record per line.
void write_corpus(const std::filesystem::path& output, CorpusFormat format, const std::vector<Document>& docs);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace codecorpus::corpus
