#pragma once

#include "mixq/pareto.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mixq {

inline constexpr int log_schema_version = 1;

// First line of every records log; carries what a standalone report needs to
// reproduce the scalarized objective.
struct LogMeta {
    int schema_version = log_schema_version;
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::size_t layers = 0;
    double lambda = 1.0;
    std::int64_t m_min = 0;
    std::int64_t m_max = 0;
};

struct RunLog {
    LogMeta meta;
    std::vector<EvalRecord> records;
    std::vector<bool> duplicate_flags; // parallel to records
};

std::string meta_to_line(const LogMeta& meta);
std::string record_to_line(const EvalRecord& rec, const LogMeta& meta, bool duplicate);

// Throws std::runtime_error on empty or corrupt input.
RunLog read_records_log(const std::filesystem::path& path);

// Whole-file write through a temp file + rename; existing lines are never
// rewritten with different content, only re-emitted.
void write_records_log(const std::filesystem::path& path, const RunLog& log);

void atomic_write_file(const std::filesystem::path& path, const std::string& content);

} // namespace mixq
