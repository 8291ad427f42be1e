// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codecorpus/syntax/node.hpp"

namespace codecorpus::syntax {

/// Renders a node the way CPython 3.10's `ast.dump(node)` does with default
/// arguments (field names, no positions). Two trees dump equally iff CPython
/// would consider them the same AST.
std::string dump(const SyntaxNode& node);

/// Number of nodes on the longest root-to-leaf path; the module root counts
/// as 1. Expression contexts and operators are attributes, not nodes, so
/// "x = 1" has depth 3 (Module, Assign, Name).
std::size_t depth(const SyntaxNode& node);
inline std::size_t depth(const SyntaxTree& tree) { return depth(tree.root); }

enum class DepthBin { Shallow, Middle, Deep, Overflow };

struct DepthBins {
    std::size_t shallow_max = 7;
    std::size_t middle_max = 11;
    std::size_t deep_max = 20;
};

DepthBin classify_depth(std::size_t d, const DepthBins& bins = {});
std::string_view bin_name(DepthBin bin);

struct DepthProfile {
    std::map<std::size_t, std::size_t> histogram;
    std::size_t parsed = 0;
    std::size_t failed = 0;

    void merge(const DepthProfile& other);
    nlohmann::ordered_json to_json() const;
    static DepthProfile from_json(const nlohmann::json& j);

    friend bool operator==(const DepthProfile&, const DepthProfile&) = default;
};

/// Parses every document and bins the successful ones by depth.
DepthProfile depth_profile(const std::vector<std::string>& documents, unsigned workers = 1);

/// Preorder node kinds with child counts, e.g. "Module(Assign(Name,Constant))".
/// Two trees are node-kind-isomorphic iff their signatures are equal.
std::string kind_signature(const SyntaxNode& node);
bool kind_isomorphic(const SyntaxNode& a, const SyntaxNode& b);

/// Checks the structural invariants every parsed tree satisfies: child spans
/// nest inside parent spans, leaves have no children, identifier payloads
/// are valid identifiers. Returns a description of the first violation, or
/// an empty string.
std::string check_invariants(const SyntaxNode& root);

}  // namespace codecorpus::syntax
