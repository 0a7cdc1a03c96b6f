#ifndef FRICTION_STORE_HPP
#define FRICTION_STORE_HPP

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "friction/types.hpp"

namespace friction {

/// Where finished trajectories go. `append` is called once per problem,
/// from concurrent workers, with a complete validated trajectory.
class TrajectorySink {
public:
    virtual ~TrajectorySink() = default;
    virtual bool contains(const std::string& problem_id) const = 0;
    virtual void append(const Trajectory& t) = 0;
    virtual std::map<std::string, Trajectory> trajectories() const = 0;
};

/// In-memory sink for tests and analysis pipelines.
class MemoryStore : public TrajectorySink {
public:
    bool contains(const std::string& problem_id) const override;
    void append(const Trajectory& t) override;
    std::map<std::string, Trajectory> trajectories() const override;

private:
    mutable std::mutex mu_;
    std::map<std::string, Trajectory> map_;
};

/// Run-directory sink backed by an append-only journal (journal.jsonl).
///
/// Each model attempt is one TrajectoryLogLine; a problem's lines are
/// written contiguously in one flush when its trajectory completes, the
/// last line carrying the terminal status. A crash therefore leaves only
/// whole trajectories plus possibly one torn tail group, which open()
/// truncates away; those problems are simply recomputed on resume. The
/// canonical trajectories.jsonl written by finalize() is independent of
/// completion order, so an interrupted-and-resumed run produces the same
/// bytes as an uninterrupted one.
class RunStore : public TrajectorySink {
public:
    /// Acquires the run directory's lock file and loads any existing
    /// journal. `resume` permits a non-empty journal; the stored run_id
    /// must match. A stale lock (dead pid) is stolen.
    static std::unique_ptr<RunStore> open(const std::string& dir, const std::string& run_id,
                                          bool resume);
    ~RunStore() override;

    bool contains(const std::string& problem_id) const override;
    void append(const Trajectory& t) override;
    std::map<std::string, Trajectory> trajectories() const override;

    /// Writes trajectories.jsonl with one canonical Trajectory per line,
    /// ordered like `id_order` (unknown ids follow, sorted).
    void finalize(const std::vector<std::string>& id_order) const;

    const std::string& dir() const { return dir_; }
    std::uint64_t next_seq() const { return seq_; }

    RunStore(const RunStore&) = delete;
    RunStore& operator=(const RunStore&) = delete;

private:
    RunStore(std::string dir, std::string run_id);
    void load_journal(bool resume);

    std::string dir_;
    std::string run_id_;
    std::string journal_path_;
    std::string lock_path_;
    mutable std::mutex mu_;
    std::map<std::string, Trajectory> map_;
    std::uint64_t seq_ = 0;
    int lock_fd_ = -1;
};

/// Canonical trajectory file helpers (one Trajectory JSON per line).
void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> load_trajectories(const std::string& path);

std::string iso8601_utc_now();

}  // namespace friction

#endif
