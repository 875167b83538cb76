#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace liteswarm {

enum class ScopeKind { User, AgentShared };

/// Unit of memory isolation: one user, or one agent's shared knowledge pool.
struct MemoryScope {
    ScopeKind kind = ScopeKind::User;
    std::string id;

    static MemoryScope user(std::string id) { return {ScopeKind::User, std::move(id)}; }
    static MemoryScope agent_shared(std::string agent_name) {
        return {ScopeKind::AgentShared, std::move(agent_name)};
    }

    bool operator==(const MemoryScope&) const = default;
};

struct MemoryRecord {
    std::string record_id;
    MemoryScope scope;
    std::string text;
    std::uint64_t created_at = 0;   // monotonic sequence number within one store

    bool operator==(const MemoryRecord&) const = default;
};

struct ScoredMemory {
    MemoryRecord record;
    double score = 0.0;
};

struct EmptyText : std::runtime_error { using std::runtime_error::runtime_error; };

/// Token-set cosine over lowercase alphanumeric tokens:
/// |Q∩T| / sqrt(|Q|·|T|), 0 when either token set is empty.
double lexical_score(const std::string& query, const std::string& text);

/// In-memory scoped store with deterministic lexical ranking and an optional
/// append-only JSONL journal replayed at startup.
class MemoryStore {
public:
    MemoryStore() = default;
    explicit MemoryStore(std::string journal_path);

    std::string store(const std::string& text, const MemoryScope& scope);

    /// Top-k records in scope with nonzero score, ranked by score descending,
    /// ties by created_at descending then record_id ascending.
    std::vector<ScoredMemory> retrieve(const std::string& query, const MemoryScope& scope,
                                       std::size_t k = 5) const;

    std::size_t forget_scope(const MemoryScope& scope);

    /// Every record in the scope, in creation order.
    std::vector<MemoryRecord> records_in_scope(const MemoryScope& scope) const;

    std::size_t size() const;
    std::size_t store_count() const;   // number of successful store() calls

private:
    void append_journal_line(const MemoryRecord& record);
    void rewrite_journal();
    void replay_journal();

    mutable std::mutex mutex_;
    std::vector<MemoryRecord> records_;
    std::uint64_t next_seq_ = 1;
    std::uint64_t store_calls_ = 0;
    std::string journal_path_;
};

}  // namespace liteswarm
