#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qdet/analyzer.hpp"
#include "qdet/compare.hpp"

namespace qdet {

struct AlgorithmRecord {
    std::string id;
    std::string name;
    std::string description;
    std::size_t determinant_count = 0; // derived when listing
};

/// Metadata of one stored determinant. D and P are computed at insert time
/// under the recorded counting flags and must stay reproducible by
/// re-analysis of the stored file.
struct DeterminantRecord {
    std::string id;
    std::string algorithm_id;
    std::map<std::string, int> params; // empty when the chart had none
    int iterations = 0;                // 0 when untruncated
    int D = 0;
    std::uint64_t P = 0;
    Sharing sharing = Sharing::Dag;
    bool doubling = true;
    ChainCount chain_count = ChainCount::Exact;
};

/// Directory-backed store:
///   <root>/algorithms.json          index of algorithm records
///   <root>/determinants/<id>.qd     determinant file, byte-verbatim
///   <root>/determinants/<id>.json   metadata of the record
/// Writers hold an exclusive lock on <root>/lock; readers a shared one. All
/// index and metadata updates go through temp-file-plus-rename.
class Catalog {
public:
    explicit Catalog(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    AlgorithmRecord algorithm_add(const std::string& id,
                                  const std::string& name,
                                  const std::string& description);
    AlgorithmRecord algorithm_update(const std::string& id,
                                     const std::string& name,
                                     const std::string& description);
    std::vector<AlgorithmRecord> algorithm_list() const;
    /// Removes the algorithm and every determinant stored under it.
    void algorithm_remove(const std::string& id);

    /// Parses and analyzes the determinant text, then stores it verbatim
    /// together with the computed characteristics.
    DeterminantRecord determinant_add(const std::string& id,
                                      const std::string& algorithm_id,
                                      const std::string& determinant_text,
                                      const AnalyzeConfig& cfg = {});
    std::vector<DeterminantRecord> determinant_list() const;
    std::vector<DeterminantRecord> determinant_list(
        const std::string& algorithm_id) const;
    /// The stored determinant file, byte-identical to what was added.
    std::string determinant_download(const std::string& id) const;
    void determinant_remove(const std::string& id);

    /// compare() over the stored characteristics of two algorithms.
    ComparisonReport compare_via_catalog(const std::string& algo_a,
                                         const std::string& algo_b) const;

private:
    std::filesystem::path root_;
};

} // namespace qdet
