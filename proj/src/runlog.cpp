#include "mixq/runlog.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>

namespace mixq {

using nlohmann::json;

std::string meta_to_line(const LogMeta& meta) {
    json j;
    j["type"] = "meta";
    j["schema_version"] = meta.schema_version;
    j["config_hash"] = meta.config_hash;
    j["master_seed"] = meta.master_seed;
    j["layers"] = meta.layers;
    j["lambda"] = meta.lambda;
    j["m_min"] = meta.m_min;
    j["m_max"] = meta.m_max;
    return j.dump();
}

std::string record_to_line(const EvalRecord& rec, const LogMeta& meta, bool duplicate) {
    json j;
    j["type"] = "eval";
    j["schema_version"] = meta.schema_version;
    j["config_hash"] = meta.config_hash;
    j["config"] = rec.config.to_digits();
    j["P"] = rec.performance;
    j["M"] = rec.memory_bytes;
    j["seed"] = rec.seed;
    j["iteration"] = rec.iteration;
    j["phase"] = rec.phase;
    j["failed"] = rec.failed;
    j["duplicate"] = duplicate;
    j["breakdown"] = {{"base", rec.breakdown.base_bytes},
                      {"scales", rec.breakdown.scale_bytes},
                      {"codebook", rec.breakdown.codebook_bytes},
                      {"adapter", rec.breakdown.adapter_bytes},
                      {"optimizer", rec.breakdown.optimizer_bytes},
                      {"total", rec.breakdown.total}};
    return j.dump();
}

namespace {

LogMeta meta_from_json(const json& j) {
    LogMeta m;
    m.schema_version = j.at("schema_version").get<int>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.layers = j.at("layers").get<std::size_t>();
    m.lambda = j.at("lambda").get<double>();
    m.m_min = j.at("m_min").get<std::int64_t>();
    m.m_max = j.at("m_max").get<std::int64_t>();
    return m;
}

std::pair<EvalRecord, bool> record_from_json(const json& j) {
    EvalRecord r;
    r.config = QuantConfig::from_digits(j.at("config").get<std::string>());
    r.performance = j.at("P").get<double>();
    r.memory_bytes = j.at("M").get<std::int64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.iteration = j.at("iteration").get<int>();
    r.phase = j.at("phase").get<std::string>();
    r.failed = j.at("failed").get<bool>();
    const json& b = j.at("breakdown");
    r.breakdown.base_bytes = b.at("base").get<std::int64_t>();
    r.breakdown.scale_bytes = b.at("scales").get<std::int64_t>();
    r.breakdown.codebook_bytes = b.at("codebook").get<std::int64_t>();
    r.breakdown.adapter_bytes = b.at("adapter").get<std::int64_t>();
    r.breakdown.optimizer_bytes = b.at("optimizer").get<std::int64_t>();
    r.breakdown.total = b.at("total").get<std::int64_t>();
    return {std::move(r), j.at("duplicate").get<bool>()};
}

} // namespace

RunLog read_records_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open log: " + path.string());
    RunLog log;
    std::string line;
    bool have_meta = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error("corrupt log line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        const std::string type = j.value("type", "");
        if (type == "meta") {
            log.meta = meta_from_json(j);
            have_meta = true;
        } else if (type == "eval") {
            auto [rec, dup] = record_from_json(j);
            log.records.push_back(std::move(rec));
            log.duplicate_flags.push_back(dup);
        } else {
            throw std::runtime_error("corrupt log line " + std::to_string(line_no) +
                                     ": unknown record type");
        }
    }
    if (!have_meta || log.records.empty()) {
        throw std::runtime_error("log " + path.string() + " is empty or missing its meta line");
    }
    return log;
}

void write_records_log(const std::filesystem::path& path, const RunLog& log) {
    std::string content = meta_to_line(log.meta);
    content.push_back('\n');
    for (std::size_t i = 0; i < log.records.size(); ++i) {
        const bool dup = i < log.duplicate_flags.size() && log.duplicate_flags[i];
        content += record_to_line(log.records[i], log.meta, dup);
        content.push_back('\n');
    }
    atomic_write_file(path, content);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

} // namespace mixq
