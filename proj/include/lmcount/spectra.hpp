#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lmcount/arith.hpp"
#include "lmcount/hecke.hpp"

namespace lmcount {

// Residues of the integers of absolute value <= floor(2 sqrt(ell)) -- the
// traces allowed at ell by the Hasse bound.
struct HasseSet {
    std::uint32_t ell = 2;
    std::uint32_t p = 0;
    int bound = 0;
    std::vector<std::uint32_t> residues;

    explicit HasseSet(std::uint32_t p_, std::uint32_t ell_ = 2) : ell(ell_), p(p_) {
        int b = 0;
        while (static_cast<std::uint64_t>(b + 1) * (b + 1) <= 4ULL * ell) ++b;
        bound = b;
        if (p <= 2 * static_cast<std::uint32_t>(bound))
            throw std::invalid_argument("hasse set: need p > 2*floor(2 sqrt(ell))");
        for (int k = -bound; k <= bound; ++k) residues.push_back(mod_reduce(k, p));
        std::sort(residues.begin(), residues.end());
    }
};

// Per-(N, p) spectral record.
struct LevelSpectrum {
    std::uint32_t N = 1;
    std::uint32_t p = 0;
    int s = 0;              // omega(N)
    std::size_t dim = 0;    // dim of the cuspidal plus space = g_0(N)
    FpPoly charpoly_t2;     // T_2 on the cuspidal plus space (constant 1 if dim 0)
    std::map<std::uint32_t, FpPoly> divisor_charpolys;  // proper divisors only
    int m_new = 0;
    std::vector<std::uint32_t> m_new_roots;
    int m_hasse = 0;
    bool squarefree = false;
    std::map<std::string, int> al_counts;  // squarefree N only

    LevelSpectrum() : charpoly_t2(5) {}
};

// multiplicity-one roots of the level-N charpoly that are not roots of the
// charpoly at any proper divisor level
inline std::pair<int, std::vector<std::uint32_t>> m_new_count(
    std::uint32_t N, const FpPoly& charpoly_at_N, const std::map<std::uint32_t, FpPoly>& divisor_charpolys) {
    for (std::uint32_t M : divisors(N)) {
        if (M == N) continue;
        if (!divisor_charpolys.count(M))
            throw std::invalid_argument("m_new: missing divisor charpoly at M=" + std::to_string(M));
    }
    std::vector<std::uint32_t> roots;
    for (std::uint32_t a : simple_roots(charpoly_at_N)) {
        bool old = false;
        for (const auto& [M, f] : divisor_charpolys)
            if (f.eval(FpElement(a, f.modulus())).value == 0) { old = true; break; }
        if (!old) roots.push_back(a);
    }
    return {static_cast<int>(roots.size()), roots};
}

// distinct roots lying in the Hasse residue set (multiplicity ignored)
inline int m_hasse_count(const FpPoly& charpoly_at_N, const HasseSet& hs) {
    require_same_modulus(charpoly_at_N.modulus(), hs.p);
    int count = 0;
    for (std::uint32_t r : hs.residues)
        if (charpoly_at_N.eval(FpElement(r, hs.p)).value == 0) ++count;
    return count;
}

// ---- disk cache -------------------------------------------------------

inline nlohmann::json spectrum_to_json(const LevelSpectrum& ls) {
    nlohmann::json j;
    j["n"] = ls.N;
    j["p"] = ls.p;
    j["omega"] = ls.s;
    j["dim"] = ls.dim;
    j["charpoly_t2"] = ls.charpoly_t2.is_zero() ? std::vector<std::uint32_t>{}
                                                : ls.charpoly_t2.coefficients();
    j["m_new"] = ls.m_new;
    j["m_new_roots"] = ls.m_new_roots;
    j["m_hasse"] = ls.m_hasse;
    if (ls.squarefree) {
        nlohmann::json al = nlohmann::json::object();
        for (const auto& [chi, c] : ls.al_counts) al[chi] = c;
        j["al_counts"] = al;
    }
    return j;
}

inline LevelSpectrum spectrum_from_json(const nlohmann::json& j, std::uint32_t expect_n, std::uint32_t expect_p) {
    LevelSpectrum ls;
    ls.N = j.at("n").get<std::uint32_t>();
    ls.p = j.at("p").get<std::uint32_t>();
    if (ls.N != expect_n || ls.p != expect_p) throw std::runtime_error("record does not match its key");
    ls.s = j.at("omega").get<int>();
    ls.dim = j.at("dim").get<std::size_t>();
    std::vector<std::int64_t> coeffs;
    for (const auto& c : j.at("charpoly_t2")) coeffs.push_back(c.get<std::int64_t>());
    ls.charpoly_t2 = FpPoly(ls.p, coeffs);
    if (ls.charpoly_t2.degree() != static_cast<int>(ls.dim)) throw std::runtime_error("charpoly degree mismatch");
    ls.m_new = j.at("m_new").get<int>();
    for (const auto& r : j.at("m_new_roots")) ls.m_new_roots.push_back(r.get<std::uint32_t>());
    ls.m_hasse = j.at("m_hasse").get<int>();
    ls.squarefree = j.contains("al_counts");
    if (ls.squarefree)
        for (const auto& [k, v] : j.at("al_counts").items()) ls.al_counts[k] = v.get<int>();
    return ls;
}

// Computes and caches LevelSpectrum records for one coefficient prime.
// Disk layout: <dir>/<p>/<N>.json, one JSON document per record, written
// atomically (temp file + rename).  Unreadable records are reported on
// stderr with their path and treated as cache misses.
class SpectrumEngine {
public:
    SpectrumEngine(std::uint32_t p, std::filesystem::path cache_dir, std::size_t space_budget = 2ULL << 30)
        : p_(checked_modulus(p)), dir_(std::move(cache_dir)), spaces_(p, space_budget), hasse_(p) {
        std::filesystem::create_directories(dir_ / std::to_string(p_));
    }

    std::uint32_t modulus() const { return p_; }
    SpaceCache& spaces() { return spaces_; }

    std::shared_ptr<const LevelSpectrum> get(std::uint32_t N) {
        {
            std::unique_lock<std::mutex> lk(mu_);
            for (;;) {
                auto it = memo_.find(N);
                if (it != memo_.end()) return it->second;
                if (!building_.count(N)) break;
                cv_.wait(lk);
            }
            building_.insert(N);
        }
        std::shared_ptr<const LevelSpectrum> rec;
        try {
            std::optional<LevelSpectrum> disk = load(N);
            if (disk)
                rec = std::make_shared<const LevelSpectrum>(std::move(*disk));
            else {
                LevelSpectrum fresh = compute(N);
                store(fresh);
                rec = std::make_shared<const LevelSpectrum>(std::move(fresh));
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(mu_);
            building_.erase(N);
            cv_.notify_all();
            throw;
        }
        std::lock_guard<std::mutex> lk(mu_);
        memo_.emplace(N, rec);
        building_.erase(N);
        cv_.notify_all();
        return rec;
    }

    std::filesystem::path record_path(std::uint32_t N) const {
        return dir_ / std::to_string(p_) / (std::to_string(N) + ".json");
    }

private:
    std::optional<LevelSpectrum> load(std::uint32_t N) {
        std::filesystem::path path = record_path(N);
        std::ifstream in(path);
        if (!in) return std::nullopt;
        try {
            nlohmann::json j = nlohmann::json::parse(in);
            return spectrum_from_json(j, N, p_);
        } catch (const std::exception& e) {
            std::cerr << "cache: discarding unreadable record " << path << " (" << e.what() << ")\n";
            return std::nullopt;
        }
    }

    void store(const LevelSpectrum& ls) {
        std::filesystem::path path = record_path(ls.N);
        std::ostringstream tmp_name;
        tmp_name << path.filename().string() << ".tmp." << std::this_thread::get_id();
        std::filesystem::path tmp = path.parent_path() / tmp_name.str();
        {
            std::ofstream out(tmp);
            if (!out) throw std::runtime_error("cache: cannot write " + tmp.string());
            out << spectrum_to_json(ls).dump() << '\n';
        }
        std::filesystem::rename(tmp, path);
    }

    LevelSpectrum compute(std::uint32_t N) {
        LevelSpectrum ls;
        ls.N = N;
        ls.p = p_;
        ls.s = omega(N);
        ls.squarefree = is_squarefree(N);

        std::shared_ptr<const ManinSpace> space = spaces_.get(N);
        const Subspace& v = space->cuspidal_plus();
        ls.dim = v.dim();
        std::optional<FpMatrix> t2_full;
        if (ls.dim == 0) {
            ls.charpoly_t2 = FpPoly::one(p_);
        } else {
            t2_full = hecke_matrix(*space, 2);
            ls.charpoly_t2 = restrict_operator(*t2_full, v).charpoly();
        }

        for (std::uint32_t M : divisors(N)) {
            if (M == N) continue;
            ls.divisor_charpolys.emplace(M, get(M)->charpoly_t2);
        }
        auto [cnt, roots] = m_new_count(N, ls.charpoly_t2, ls.divisor_charpolys);
        ls.m_new = cnt;
        ls.m_new_roots = std::move(roots);
        ls.m_hasse = m_hasse_count(ls.charpoly_t2, hasse_);

        if (ls.squarefree) {
            ALDecomposition dec = al_eigenspaces(*space, spaces_.getter());
            for (std::size_t mask = 0; mask < dec.eigenspaces.size(); ++mask) {
                const Subspace& es = dec.eigenspaces[mask];
                int count = 0;
                if (es.dim() > 0 && t2_full)
                    count = static_cast<int>(simple_roots(restrict_operator(*t2_full, es).charpoly()).size());
                ls.al_counts[dec.chi_string(mask)] = count;
            }
        }
        return ls;
    }

    std::uint32_t p_;
    std::filesystem::path dir_;
    SpaceCache spaces_;
    HasseSet hasse_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::uint32_t, std::shared_ptr<const LevelSpectrum>> memo_;
    std::set<std::uint32_t> building_;
};

// counts of simple T_2 roots on each Atkin-Lehner eigenspace of the new
// subspace, via a freshly computed record
inline std::map<std::string, int> al_eigensystem_counts(std::uint32_t N, std::uint32_t p,
                                                        SpectrumEngine& engine) {
    if (!is_squarefree(N)) throw std::invalid_argument("al_eigensystem_counts: N must be squarefree");
    return engine.get(N)->al_counts;
}

// ---- range scans ------------------------------------------------------

struct ScanFilters {
    bool odd_only = false;
    bool squarefree_only = false;
    int max_omega = 0;  // 0 = unbounded
};

struct ScanRow {
    std::uint32_t N;
    int omega;
    std::size_t dim;
    int m_new;
    int m_hasse;
};

struct ScanDataset {
    std::uint32_t lo = 0, hi = 0, p = 0;
    ScanFilters filters;
    std::vector<ScanRow> rows;  // ascending N
};

inline bool admissible_level(std::uint32_t N, const ScanFilters& f) {
    if (f.odd_only && N % 2 == 0) return false;
    if (f.squarefree_only && !is_squarefree(N)) return false;
    if (f.max_omega > 0 && omega(N) > f.max_omega) return false;
    return true;
}

inline ScanDataset scan(std::uint32_t lo, std::uint32_t hi, std::uint32_t p, const ScanFilters& filters,
                        SpectrumEngine& engine, unsigned workers = 0) {
    if (lo > hi || lo == 0) throw std::invalid_argument("scan: need 1 <= lo <= hi");
    if (hi > kLevelCap) throw std::invalid_argument("scan: levels are capped at 10^7");
    std::vector<std::uint32_t> levels;
    for (std::uint32_t N = lo; N <= hi; ++N)
        if (admissible_level(N, filters)) levels.push_back(N);

    // large levels first for load balance; results are keyed by N afterwards
    std::vector<std::uint32_t> order = levels;
    std::sort(order.begin(), order.end(), std::greater<>());
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::vector<std::string> skipped;
    auto run = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= order.size()) return;
            std::uint32_t N = order[i];
            try {
                engine.get(N);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(err_mu);
                skipped.push_back("level " + std::to_string(N) + ": " + e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (std::thread& t : pool) t.join();
    for (const std::string& s : skipped) std::cerr << "scan: skipped " << s << '\n';

    ScanDataset out;
    out.lo = lo;
    out.hi = hi;
    out.p = p;
    out.filters = filters;
    for (std::uint32_t N : levels) {
        std::shared_ptr<const LevelSpectrum> rec;
        try {
            rec = engine.get(N);
        } catch (...) {
            continue;  // reported above
        }
        out.rows.push_back({N, rec->s, rec->dim, rec->m_new, rec->m_hasse});
    }
    return out;
}

inline std::string dataset_to_csv(const ScanDataset& d) {
    std::ostringstream out;
    out << "N,p,omega,dim,m_new,m_hasse\n";
    for (const ScanRow& r : d.rows)
        out << r.N << ',' << d.p << ',' << r.omega << ',' << r.dim << ',' << r.m_new << ',' << r.m_hasse << '\n';
    return out.str();
}

inline ScanDataset dataset_from_csv(std::istream& in) {
    ScanDataset d;
    std::string line;
    if (!std::getline(in, line) || line != "N,p,omega,dim,m_new,m_hasse")
        throw std::invalid_argument("dataset: bad CSV header");
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ScanRow r{};
        std::uint32_t p = 0;
        if (std::sscanf(line.c_str(), "%u,%u,%d,%zu,%d,%d", &r.N, &p, &r.omega, &r.dim, &r.m_new, &r.m_hasse) != 6)
            throw std::invalid_argument("dataset: bad CSV row: " + line);
        if (first) {
            d.p = p;
            first = false;
        } else if (p != d.p) {
            throw std::invalid_argument("dataset: mixed coefficient primes in CSV");
        }
        d.rows.push_back(r);
        d.lo = d.lo == 0 ? r.N : std::min(d.lo, r.N);
        d.hi = std::max(d.hi, r.N);
    }
    return d;
}

}  // namespace lmcount
