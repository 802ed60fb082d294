#include "qdet/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

namespace qdet {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

/// flock-based store lock, shared for reads and exclusive for writes.
class StoreLock {
public:
    StoreLock(const fs::path& root, bool exclusive) {
        fs::path p = root / "lock";
        fd_ = ::open(p.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0)
            throw IoError("cannot open lock file " + p.string());
        if (::flock(fd_, exclusive ? LOCK_EX : LOCK_SH) != 0) {
            ::close(fd_);
            throw IoError("cannot lock store at " + root.string());
        }
    }
    ~StoreLock() {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    int fd_ = -1;
};

void require_clean_id(const std::string& id) {
    if (id.empty()) throw DomainError("record id must not be empty");
    for (char c : id)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' &&
            c != '_' && c != '.')
            throw DomainError("record id '" + id +
                              "' may only contain letters, digits, '-', '_' "
                              "and '.'");
    if (id.front() == '.')
        throw DomainError("record id may not start with '.'");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& target, const std::string& data) {
    static std::mt19937_64 rng{std::random_device{}()};
    fs::path tmp = target;
    tmp += ".tmp" + std::to_string(::getpid()) + "." +
           std::to_string(rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << data;
        out.flush();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot replace " + target.string());
    }
}

struct Index {
    std::vector<AlgorithmRecord> algorithms; // sorted by id
};

fs::path index_path(const fs::path& root) { return root / "algorithms.json"; }
fs::path det_dir(const fs::path& root) { return root / "determinants"; }

Index load_index(const fs::path& root) {
    Index idx;
    fs::path p = index_path(root);
    if (!fs::exists(p)) return idx;
    json j;
    try {
        j = json::parse(slurp(p));
        for (const json& e : j.at("algorithms")) {
            AlgorithmRecord r;
            r.id = e.at("id").get<std::string>();
            r.name = e.at("name").get<std::string>();
            r.description = e.at("description").get<std::string>();
            idx.algorithms.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw StoreCorrupt(p.string(), e.what());
    }
    std::sort(idx.algorithms.begin(), idx.algorithms.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    return idx;
}

void save_index(const fs::path& root, const Index& idx) {
    ordered_json j;
    j["algorithms"] = ordered_json::array();
    for (const AlgorithmRecord& r : idx.algorithms) {
        ordered_json e;
        e["id"] = r.id;
        e["name"] = r.name;
        e["description"] = r.description;
        j["algorithms"].push_back(std::move(e));
    }
    write_atomic(index_path(root), j.dump(2) + "\n");
}

AlgorithmRecord* find_algorithm(Index& idx, const std::string& id) {
    for (AlgorithmRecord& r : idx.algorithms)
        if (r.id == id) return &r;
    return nullptr;
}

std::string meta_to_json(const DeterminantRecord& r) {
    ordered_json j;
    j["id"] = r.id;
    j["algorithm"] = r.algorithm_id;
    j["params"] = r.params;
    j["iterations"] = r.iterations;
    j["D"] = r.D;
    j["P"] = r.P;
    j["sharing"] = to_string(r.sharing);
    j["doubling"] = r.doubling;
    j["chainCount"] = to_string(r.chain_count);
    return j.dump(2) + "\n";
}

DeterminantRecord meta_from_json(const fs::path& p, const std::string& text) {
    DeterminantRecord r;
    try {
        json j = json::parse(text);
        r.id = j.at("id").get<std::string>();
        r.algorithm_id = j.at("algorithm").get<std::string>();
        r.params =
            j.at("params").get<std::map<std::string, int>>();
        r.iterations = j.at("iterations").get<int>();
        r.D = j.at("D").get<int>();
        r.P = j.at("P").get<std::uint64_t>();
        auto sh = sharing_from_string(j.at("sharing").get<std::string>());
        auto cc =
            chain_count_from_string(j.at("chainCount").get<std::string>());
        if (!sh || !cc) throw StoreCorrupt(p.string(), "unknown flag value");
        r.sharing = *sh;
        r.chain_count = *cc;
        r.doubling = j.at("doubling").get<bool>();
    } catch (const json::exception& e) {
        throw StoreCorrupt(p.string(), e.what());
    }
    return r;
}

std::vector<DeterminantRecord> load_determinants(const fs::path& root) {
    std::vector<DeterminantRecord> out;
    fs::path dir = det_dir(root);
    if (!fs::exists(dir)) return out;
    for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        out.push_back(meta_from_json(e.path(), slurp(e.path())));
        if (out.back().id != e.path().stem().string())
            throw StoreCorrupt(e.path().string(),
                               "metadata id does not match the file name");
    }
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    return out;
}

Characteristics to_characteristics(const DeterminantRecord& r) {
    Characteristics c;
    c.D = r.D;
    c.P = r.P;
    c.params = r.params;
    c.iterations = r.iterations;
    c.sharing = r.sharing;
    c.doubling = r.doubling;
    c.chain_count = r.chain_count;
    return c;
}

} // namespace

Catalog::Catalog(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(det_dir(root_), ec);
    if (ec || !fs::is_directory(root_))
        throw IoError("cannot create store directory " + root_.string());
}

AlgorithmRecord Catalog::algorithm_add(const std::string& id,
                                       const std::string& name,
                                       const std::string& description) {
    require_clean_id(id);
    StoreLock lock(root_, true);
    Index idx = load_index(root_);
    if (find_algorithm(idx, id)) throw DuplicateId(id);
    AlgorithmRecord r{id, name, description, 0};
    idx.algorithms.push_back(r);
    std::sort(idx.algorithms.begin(), idx.algorithms.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    save_index(root_, idx);
    return r;
}

AlgorithmRecord Catalog::algorithm_update(const std::string& id,
                                          const std::string& name,
                                          const std::string& description) {
    StoreLock lock(root_, true);
    Index idx = load_index(root_);
    AlgorithmRecord* r = find_algorithm(idx, id);
    if (!r) throw NotFound(id);
    r->name = name;
    r->description = description;
    save_index(root_, idx);
    return *r;
}

std::vector<AlgorithmRecord> Catalog::algorithm_list() const {
    StoreLock lock(root_, false);
    Index idx = load_index(root_);
    auto dets = load_determinants(root_);
    for (AlgorithmRecord& r : idx.algorithms)
        r.determinant_count = static_cast<std::size_t>(
            std::count_if(dets.begin(), dets.end(), [&](const auto& d) {
                return d.algorithm_id == r.id;
            }));
    return idx.algorithms;
}

void Catalog::algorithm_remove(const std::string& id) {
    StoreLock lock(root_, true);
    Index idx = load_index(root_);
    AlgorithmRecord* r = find_algorithm(idx, id);
    if (!r) throw NotFound(id);
    for (const DeterminantRecord& d : load_determinants(root_))
        if (d.algorithm_id == id) {
            fs::remove(det_dir(root_) / (d.id + ".qd"));
            fs::remove(det_dir(root_) / (d.id + ".json"));
        }
    idx.algorithms.erase(
        std::remove_if(idx.algorithms.begin(), idx.algorithms.end(),
                       [&](const auto& a) { return a.id == id; }),
        idx.algorithms.end());
    save_index(root_, idx);
}

DeterminantRecord Catalog::determinant_add(const std::string& id,
                                           const std::string& algorithm_id,
                                           const std::string& determinant_text,
                                           const AnalyzeConfig& cfg) {
    require_clean_id(id);
    QDeterminant q = parse_qdet(determinant_text);
    Characteristics c = analyze(q, cfg);

    StoreLock lock(root_, true);
    Index idx = load_index(root_);
    if (!find_algorithm(idx, algorithm_id)) throw NotFound(algorithm_id);
    fs::path meta = det_dir(root_) / (id + ".json");
    if (fs::exists(meta)) throw DuplicateId(id);

    DeterminantRecord r;
    r.id = id;
    r.algorithm_id = algorithm_id;
    r.params = c.params;
    r.iterations = c.iterations;
    r.D = c.D;
    r.P = c.P;
    r.sharing = c.sharing;
    r.doubling = c.doubling;
    r.chain_count = c.chain_count;
    write_atomic(det_dir(root_) / (id + ".qd"), determinant_text);
    write_atomic(meta, meta_to_json(r));
    return r;
}

std::vector<DeterminantRecord> Catalog::determinant_list() const {
    StoreLock lock(root_, false);
    return load_determinants(root_);
}

std::vector<DeterminantRecord> Catalog::determinant_list(
    const std::string& algorithm_id) const {
    StoreLock lock(root_, false);
    Index idx = load_index(root_);
    if (!find_algorithm(idx, algorithm_id)) throw NotFound(algorithm_id);
    auto all = load_determinants(root_);
    std::erase_if(all, [&](const auto& d) {
        return d.algorithm_id != algorithm_id;
    });
    return all;
}

std::string Catalog::determinant_download(const std::string& id) const {
    require_clean_id(id);
    StoreLock lock(root_, false);
    fs::path p = det_dir(root_) / (id + ".qd");
    if (!fs::exists(p)) throw NotFound(id);
    return slurp(p);
}

void Catalog::determinant_remove(const std::string& id) {
    require_clean_id(id);
    StoreLock lock(root_, true);
    fs::path meta = det_dir(root_) / (id + ".json");
    if (!fs::exists(meta)) throw NotFound(id);
    fs::remove(det_dir(root_) / (id + ".qd"));
    fs::remove(meta);
}

ComparisonReport Catalog::compare_via_catalog(const std::string& algo_a,
                                              const std::string& algo_b) const {
    std::vector<Characteristics> a, b;
    {
        StoreLock lock(root_, false);
        Index idx = load_index(root_);
        if (!find_algorithm(idx, algo_a)) throw NotFound(algo_a);
        if (!find_algorithm(idx, algo_b)) throw NotFound(algo_b);
        for (const DeterminantRecord& d : load_determinants(root_)) {
            if (d.algorithm_id == algo_a) a.push_back(to_characteristics(d));
            if (d.algorithm_id == algo_b) b.push_back(to_characteristics(d));
        }
    }
    return compare(a, b);
}

} // namespace qdet
