#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "inctab/table.hpp"
#include "inctab/term.hpp"

namespace inctab {

class Engine;

struct CursorAnswer {
    /// Bindings of the table's subgoal variables.
    std::vector<Term> tuple;
    /// The subgoal instantiated with the answer.
    Term atom;
    TruthValue truth = TruthValue::True;
};

CursorAnswer make_cursor_answer(const Table& t, std::uint32_t idx);

/// True if `a` unifies with the cursor filter (or there is none).
bool filter_accepts(const std::optional<Term>& filter, const CursorAnswer& a);

/// Shared between a Cursor handle and the table it reads. A live cursor
/// counts towards the table's occp_num; `preserve_views` turns it into a
/// snapshot of the answers it had not yet returned.
struct CursorState {
    Engine* engine = nullptr;
    TableId table = kNoTable;
    std::size_t pos = 0;
    bool live = true;
    bool done = false;
    std::optional<Term> filter;
    std::vector<CursorAnswer> snapshot;
    std::size_t snap_pos = 0;
};

/// Iterator over the answers of a completed table, fixed at the moment it
/// was opened even if the table is re-evaluated afterwards.
class Cursor {
public:
    Cursor() = default;
    explicit Cursor(std::shared_ptr<CursorState> st) : st_(std::move(st)) {}
    Cursor(const Cursor&) = delete;
    Cursor& operator=(const Cursor&) = delete;
    Cursor(Cursor&& o) noexcept = default;
    Cursor& operator=(Cursor&& o) noexcept {
        if (this != &o) {
            close();
            st_ = std::move(o.st_);
        }
        return *this;
    }
    ~Cursor() { close(); }

    std::optional<CursorAnswer> next();
    void close();

    bool exhausted() const { return !st_ || st_->done; }
    /// True once the cursor reads from a preserved snapshot.
    bool preserved() const { return st_ && !st_->live; }
    TableId table() const { return st_ ? st_->table : kNoTable; }

private:
    std::shared_ptr<CursorState> st_;
};

} // namespace inctab
