// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codecorpus/syntax/node.hpp"

namespace codecorpus::transforms {

using syntax::SyntaxNode;
using syntax::SyntaxTree;

enum class IdentifierCategory { Variable, Function, ClassDefinition, Argument, Attribute, ImportName };

std::string_view category_name(IdentifierCategory category);

/// One renameable name site.
///
/// `node` points into the tree passed to collect_identifiers and is only
/// valid while that tree lives. `span` is the span of that node. Dotted
/// import paths ("os.path") yield one occurrence per component.
struct IdentifierOccurrence {
    std::string name;
    IdentifierCategory category = IdentifierCategory::Variable;
    const SyntaxNode* node = nullptr;
    syntax::Span span;
};

/// Every identifier site in document order:
///
///   variable       - Name, global/nonlocal names, `except ... as n`,
///                    capture patterns and `**rest`
///   function       - def / async def names
///   class-definition - class names
///   argument       - parameters (including lambda, *args, **kwargs) and
///                    keyword names at call sites and in class headers
///   attribute      - `.attr` and keyword names in class patterns
///   import-name    - imported module paths, imported names, `as` names
///
/// Keywords, string contents and the `*` of star imports are not sites.
std::vector<IdentifierOccurrence> collect_identifiers(const SyntaxTree& tree);

/// Removes statements that consist of a bare string constant (docstrings and
/// other unused string expressions). A block left empty gets a single `pass`
/// so the result stays valid; the module body may become empty.
SyntaxTree strip_comments(const SyntaxTree& tree);

/// Replaces every site with a name drawn uniformly from the document's
/// distinct identifiers, independently per site.
SyntaxTree scramble_identifiers(const SyntaxTree& tree, std::uint64_t seed);

struct RenameMap {
    std::map<std::string, std::string> entries;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kRandomNameLength = 8;

/// Draws an injective map from each distinct identifier of the document to a
/// random 8-character identifier. Replacements never equal a keyword, a name
/// already present in the document, or another replacement.
RenameMap randomize_map(const SyntaxTree& tree, std::uint64_t seed);

/// Renames every site whose name has an entry in the map.
SyntaxTree rename(const SyntaxTree& tree, const RenameMap& map);

inline SyntaxTree randomize_identifiers(const SyntaxTree& tree, std::uint64_t seed) {
    return rename(tree, randomize_map(tree, seed));
}

enum class TransformMode { Raw, CommentFree, CommentFreeScrambled, CommentFreeRandomized };

// "raw", "cf", "cf_s", "cf_r".
std::string_view mode_name(TransformMode mode);
// Throws std::invalid_argument on an unknown name.
TransformMode parse_mode(std::string_view name);

struct TransformSpec {
    TransformMode mode = TransformMode::Raw;
    std::uint64_t seed = 0;

    nlohmann::ordered_json to_json() const;
    static TransformSpec from_json(const nlohmann::json& j);

    friend bool operator==(const TransformSpec&, const TransformSpec&) = default;
};

/// Raw is the identity, CF strips comments, CF+S and CF+R strip and then
/// scramble or randomize with `spec.seed`.
SyntaxTree apply(const TransformSpec& spec, const SyntaxTree& tree);

}  // namespace codecorpus::transforms
