#include "friction/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include "friction/errors.hpp"

namespace friction {

namespace fs = std::filesystem;

std::string iso8601_utc_now() {
    using namespace std::chrono;
    auto now = system_clock::now();
    auto secs = time_point_cast<seconds>(now);
    auto ms = duration_cast<milliseconds>(now - secs).count();
    std::time_t t = system_clock::to_time_t(secs);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms));
    return buf;
}

// ---------------------------------------------------------------------------
// MemoryStore
// ---------------------------------------------------------------------------

bool MemoryStore::contains(const std::string& problem_id) const {
    std::lock_guard lock(mu_);
    return map_.count(problem_id) > 0;
}

void MemoryStore::append(const Trajectory& t) {
    validate_trajectory(t);
    std::lock_guard lock(mu_);
    if (!map_.emplace(t.problem_id, t).second)
        throw StoreError("duplicate trajectory for " + t.problem_id);
}

std::map<std::string, Trajectory> MemoryStore::trajectories() const {
    std::lock_guard lock(mu_);
    return map_;
}

// ---------------------------------------------------------------------------
// RunStore
// ---------------------------------------------------------------------------

RunStore::RunStore(std::string dir, std::string run_id)
    : dir_(std::move(dir)),
      run_id_(std::move(run_id)),
      journal_path_(dir_ + "/journal.jsonl"),
      lock_path_(dir_ + "/run.lock") {}

std::unique_ptr<RunStore> RunStore::open(const std::string& dir, const std::string& run_id,
                                         bool resume) {
    fs::create_directories(dir);
    std::unique_ptr<RunStore> store(new RunStore(dir, run_id));

    // single writer per run directory
    for (int attempt = 0; attempt < 2; ++attempt) {
        int fd = ::open(store->lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd >= 0) {
            std::string pid = std::to_string(::getpid()) + "\n";
            if (::write(fd, pid.data(), pid.size()) < 0) { /* lock still held */ }
            store->lock_fd_ = fd;
            break;
        }
        std::ifstream in(store->lock_path_);
        long other = 0;
        in >> other;
        if (other > 0 && (::kill(static_cast<pid_t>(other), 0) == 0 || errno == EPERM))
            throw StoreError("run directory locked by pid " + std::to_string(other) + ": " + dir);
        ::unlink(store->lock_path_.c_str());  // stale lock from a dead process
    }
    if (store->lock_fd_ < 0) throw StoreError("could not acquire lock: " + dir);

    store->load_journal(resume);
    return store;
}

RunStore::~RunStore() {
    if (lock_fd_ >= 0) {
        ::close(lock_fd_);
        ::unlink(lock_path_.c_str());
    }
}

void RunStore::load_journal(bool resume) {
    std::ifstream in(journal_path_, std::ios::binary);
    if (!in) return;  // fresh run
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    if (!bytes.empty() && !resume)
        throw StoreError("journal already exists (pass --resume to continue): " + journal_path_);

    // One pass over the journal: collect whole-problem groups, remembering
    // the byte offset after the last complete group so a torn tail can be
    // truncated away.
    std::size_t good_end = 0;
    std::uint64_t good_seq = 0;
    std::string group_id;
    Trajectory group;
    bool group_open = false;

    std::size_t pos = 0;
    while (pos < bytes.size()) {
        std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string::npos) break;  // torn final line
        std::string line = bytes.substr(pos, nl - pos);
        TrajectoryLogLine log_line;
        try {
            log_line = json::parse(line).get<TrajectoryLogLine>();
        } catch (const std::exception&) {
            break;  // torn or corrupt tail
        }
        if (log_line.run_id != run_id_)
            throw StoreError("journal belongs to run " + log_line.run_id + ", expected " +
                             run_id_);

        if (!group_open || log_line.problem_id != group_id) {
            if (group_open) break;  // group ended without a terminal marker
            group_open = true;
            group_id = log_line.problem_id;
            group = Trajectory{};
            group.problem_id = group_id;
        }
        if (log_line.record) group.records.push_back(*log_line.record);
        if (log_line.final) {
            group.status = log_line.final->status;
            group.solved_at = log_line.final->solved_at;
            group.abort_reason = log_line.final->abort_reason;
            validate_trajectory(group);
            if (!map_.emplace(group_id, group).second)
                throw StoreError("journal holds " + group_id + " twice");
            group_open = false;
            good_end = nl + 1;
            good_seq = log_line.seq + 1;
        }
        pos = nl + 1;
    }

    if (good_end < bytes.size()) {
        // drop the torn tail so the journal stays parseable and seq dense
        if (::truncate(journal_path_.c_str(), static_cast<off_t>(good_end)) != 0)
            throw StoreError("could not truncate torn journal tail: " + journal_path_);
    }
    seq_ = good_seq;
}

bool RunStore::contains(const std::string& problem_id) const {
    std::lock_guard lock(mu_);
    return map_.count(problem_id) > 0;
}

void RunStore::append(const Trajectory& t) {
    validate_trajectory(t);
    std::string stamp = iso8601_utc_now();

    std::lock_guard lock(mu_);
    if (map_.count(t.problem_id)) throw StoreError("duplicate trajectory for " + t.problem_id);

    std::string block;
    auto line_for = [&](const IterationRecord* rec, bool is_last) {
        TrajectoryLogLine line;
        line.run_id = run_id_;
        line.problem_id = t.problem_id;
        if (rec) line.record = *rec;
        line.wall_clock = stamp;
        line.seq = seq_++;
        if (is_last) {
            TrajectoryFinal fin;
            fin.status = t.status;
            fin.solved_at = t.solved_at;
            fin.abort_reason = t.abort_reason;
            line.final = fin;
        }
        block += json(line).dump();
        block += '\n';
    };
    if (t.records.empty()) {
        line_for(nullptr, true);
    } else {
        for (std::size_t i = 0; i < t.records.size(); ++i)
            line_for(&t.records[i], i + 1 == t.records.size());
    }

    std::ofstream out(journal_path_, std::ios::binary | std::ios::app);
    if (!out) throw StoreError("cannot open journal: " + journal_path_);
    out.write(block.data(), static_cast<std::streamsize>(block.size()));
    out.flush();
    if (!out) throw StoreError("journal write failed: " + journal_path_);

    map_.emplace(t.problem_id, t);
}

std::map<std::string, Trajectory> RunStore::trajectories() const {
    std::lock_guard lock(mu_);
    return map_;
}

void RunStore::finalize(const std::vector<std::string>& id_order) const {
    std::map<std::string, Trajectory> snapshot = trajectories();
    std::vector<Trajectory> ordered;
    ordered.reserve(snapshot.size());
    for (const auto& id : id_order) {
        auto it = snapshot.find(id);
        if (it != snapshot.end()) {
            ordered.push_back(it->second);
            snapshot.erase(it);
        }
    }
    for (auto& [id, t] : snapshot) ordered.push_back(t);  // map order: sorted by id
    write_trajectories(dir_ + "/trajectories.jsonl", ordered);
}

// ---------------------------------------------------------------------------
// Canonical trajectory files
// ---------------------------------------------------------------------------

void write_trajectories(const std::string& path, const std::vector<Trajectory>& trajectories) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError("cannot open " + tmp);
        for (const auto& t : trajectories) {
            validate_trajectory(t);
            out << json(t).dump() << '\n';
        }
        out.flush();
        if (!out) throw StoreError("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

std::vector<Trajectory> load_trajectories(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StoreError("cannot open " + path);
    std::vector<Trajectory> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            Trajectory t = json::parse(line).get<Trajectory>();
            validate_trajectory(t);
            out.push_back(std::move(t));
        } catch (const std::exception& e) {
            throw StoreError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace friction
