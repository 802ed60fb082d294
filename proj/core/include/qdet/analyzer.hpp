#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdet/qterm.hpp"

namespace qdet {

/// How operation counts treat reduction chains. Exact counts the scheduled
/// operations of the rebalanced trees (m operands cost m-1 operations). Floor
/// is the idealized model that charges floor(m/2^j) operations at relative
/// depth j of every maximal chain; the two coincide when every chain length
/// is a power of two.
enum class ChainCount { Exact, Floor };

enum class Realizability { Realizable, RealizableByTruncation, Unknown };

struct AnalyzeConfig {
    Sharing sharing = Sharing::Dag;
    bool doubling = true;
    ChainCount chain_count = ChainCount::Exact;
};

/// One operation instance of a schedule level. Under dag sharing each
/// distinct node appears once (count 1). Under tree sharing an entry carries
/// the root expression it belongs to and its occurrence multiplicity there.
struct ScheduleEntry {
    NodeId node = 0;
    std::size_t expr = 0;
    std::uint64_t count = 1;
};

/// Level-ordered execution plan: levels[r-1] lists the operations of nesting
/// level r. The height D is the number of levels; the width P is the largest
/// per-level instance total.
struct Schedule {
    std::vector<std::vector<ScheduleEntry>> levels;

    std::vector<std::uint64_t> sizes() const;
    int height() const { return static_cast<int>(levels.size()); }
    std::uint64_t width() const;
};

Schedule make_schedule(const ExprArena& arena, std::span<const NodeId> roots,
                       Sharing sharing);

/// Max nesting level over the expression set.
int height(const ExprArena& arena, std::span<const NodeId> roots);

/// Max per-level operation count over the expression set.
std::uint64_t width(const ExprArena& arena, std::span<const NodeId> roots,
                    Sharing sharing, ChainCount model);

struct Characteristics {
    int D = 0;
    std::uint64_t P = 0;
    std::map<std::string, int> params;
    int iterations = 0;
    Sharing sharing = Sharing::Dag;
    bool doubling = true;
    ChainCount chain_count = ChainCount::Exact;

    friend bool operator==(const Characteristics&,
                           const Characteristics&) = default;
};

/// The deduplicated expression set of q, rebalanced by the doubling scheme
/// when requested (this may add nodes to q's arena).
std::vector<NodeId> analysis_roots(QDeterminant& q, bool doubling);

Characteristics analyze(QDeterminant& q, const AnalyzeConfig& cfg = {});

/// Realizability of the effective implementation: no infinite terms means
/// Realizable; infinite terms materialized as truncated lists mean
/// RealizableByTruncation; an infinite term without truncation cannot be
/// decided structurally and reports Unknown.
Realizability realizability(const QDeterminant& q);
Realizability realizability(bool has_infinite_terms, bool truncated);

/// Schedule export: a JSON array of levels, each an array of
/// {"id","op","args"} objects whose args reference earlier nodes ("node"),
/// input variables ("var") or constants ("num"). Tree-sharing entries add
/// "expr" and "count".
std::string serialize_schedule(const ExprArena& arena, const Schedule& s);

const char* to_string(Sharing s);
const char* to_string(ChainCount c);
const char* to_string(Realizability r);
std::optional<Sharing> sharing_from_string(std::string_view s);
std::optional<ChainCount> chain_count_from_string(std::string_view s);

std::string characteristics_to_json(const Characteristics& c);
Characteristics characteristics_from_json_text(const std::string& text);

} // namespace qdet
