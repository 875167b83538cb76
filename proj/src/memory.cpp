#include "liteswarm/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace liteswarm {

namespace {

// Light suffix normalization so inflected forms ("traveled", "traveling",
// "friends") match their stems during retrieval.
std::string stem(std::string token) {
    if (token.size() >= 6 && token.ends_with("ing")) {
        token.resize(token.size() - 3);
    } else if (token.size() >= 5 && token.ends_with("ed")) {
        token.resize(token.size() - 2);
    } else if (token.size() >= 4 && token.ends_with("s") && !token.ends_with("ss")) {
        token.resize(token.size() - 1);
    }
    return token;
}

std::unordered_set<std::string> tokenize(const std::string& text) {
    std::unordered_set<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.insert(stem(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(stem(current));
    return tokens;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string scope_kind_name(ScopeKind kind) {
    return kind == ScopeKind::User ? "user" : "agent_shared";
}

}  // namespace

double lexical_score(const std::string& query, const std::string& text) {
    const auto q = tokenize(query);
    const auto t = tokenize(text);
    if (q.empty() || t.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& token : q) {
        if (t.count(token)) ++shared;
    }
    return static_cast<double>(shared) /
           std::sqrt(static_cast<double>(q.size()) * static_cast<double>(t.size()));
}

MemoryStore::MemoryStore(std::string journal_path) : journal_path_(std::move(journal_path)) {
    replay_journal();
}

std::string MemoryStore::store(const std::string& text, const MemoryScope& scope) {
    if (trim(text).empty()) throw EmptyText("memory text must be non-empty");
    if (scope.id.empty()) throw std::invalid_argument("scope id must be non-empty");
    std::lock_guard lock(mutex_);
    MemoryRecord record;
    record.created_at = next_seq_++;
    record.record_id = "mem-" + std::to_string(record.created_at);
    record.scope = scope;
    record.text = text;
    if (!journal_path_.empty()) append_journal_line(record);
    records_.push_back(record);
    ++store_calls_;
    return records_.back().record_id;
}

std::vector<ScoredMemory> MemoryStore::retrieve(const std::string& query,
                                                const MemoryScope& scope,
                                                std::size_t k) const {
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    std::vector<ScoredMemory> scored;
    {
        std::lock_guard lock(mutex_);
        for (const auto& record : records_) {
            if (!(record.scope == scope)) continue;
            const double score = lexical_score(query, record.text);
            if (score > 0.0) scored.push_back({record, score});
        }
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredMemory& a, const ScoredMemory& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.record.created_at != b.record.created_at) {
            return a.record.created_at > b.record.created_at;
        }
        return a.record.record_id < b.record.record_id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

std::size_t MemoryStore::forget_scope(const MemoryScope& scope) {
    std::lock_guard lock(mutex_);
    const auto before = records_.size();
    std::erase_if(records_, [&](const MemoryRecord& r) { return r.scope == scope; });
    const auto removed = before - records_.size();
    if (removed > 0 && !journal_path_.empty()) rewrite_journal();
    return removed;
}

std::vector<MemoryRecord> MemoryStore::records_in_scope(const MemoryScope& scope) const {
    std::lock_guard lock(mutex_);
    std::vector<MemoryRecord> out;
    for (const auto& record : records_) {
        if (record.scope == scope) out.push_back(record);
    }
    return out;
}

std::size_t MemoryStore::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::size_t MemoryStore::store_count() const {
    std::lock_guard lock(mutex_);
    return store_calls_;
}

void MemoryStore::append_journal_line(const MemoryRecord& record) {
    std::ofstream out(journal_path_, std::ios::app);
    if (!out) throw std::runtime_error("cannot open memory journal: " + journal_path_);
    nlohmann::json line{{"record_id", record.record_id},
                        {"scope_kind", scope_kind_name(record.scope.kind)},
                        {"scope_id", record.scope.id},
                        {"text", record.text},
                        {"created_at", record.created_at}};
    out << line.dump() << "\n";
}

void MemoryStore::rewrite_journal() {
    std::ofstream out(journal_path_, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot rewrite memory journal: " + journal_path_);
    for (const auto& record : records_) {
        nlohmann::json line{{"record_id", record.record_id},
                            {"scope_kind", scope_kind_name(record.scope.kind)},
                            {"scope_id", record.scope.id},
                            {"text", record.text},
                            {"created_at", record.created_at}};
        out << line.dump() << "\n";
    }
}

void MemoryStore::replay_journal() {
    if (journal_path_.empty()) return;
    std::ifstream in(journal_path_);
    if (!in) return;   // journal created on first store
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        MemoryRecord record;
        record.record_id = j.at("record_id").get<std::string>();
        record.scope.kind = j.at("scope_kind").get<std::string>() == "agent_shared"
                                ? ScopeKind::AgentShared
                                : ScopeKind::User;
        record.scope.id = j.at("scope_id").get<std::string>();
        record.text = j.at("text").get<std::string>();
        record.created_at = j.at("created_at").get<std::uint64_t>();
        next_seq_ = std::max(next_seq_, record.created_at + 1);
        records_.push_back(std::move(record));
    }
}

}  // namespace liteswarm
