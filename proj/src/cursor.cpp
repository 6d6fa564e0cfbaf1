#include "inctab/cursor.hpp"

#include "inctab/engine.hpp"

namespace inctab {

CursorAnswer make_cursor_answer(const Table& t, std::uint32_t idx) {
    CursorAnswer a;
    a.tuple = t.answers[idx].subst;
    a.atom = t.answer_atom(idx);
    a.truth = t.truth(idx);
    return a;
}

bool filter_accepts(const std::optional<Term>& filter, const CursorAnswer& a) {
    if (!filter) return true;
    return unify(*filter, shift_vars(a.atom, max_var_id(*filter) + 1)).has_value();
}

namespace {

void release(CursorState& st) {
    if (st.done) return;
    st.done = true;
    if (!st.live || !st.engine) return;
    if (Table* t = st.engine->mutable_table(st.table))
        if (t->occp_num > 0) --t->occp_num;
}

} // namespace

std::optional<CursorAnswer> Cursor::next() {
    if (!st_ || st_->done) return std::nullopt;
    CursorState& st = *st_;
    if (!st.live) {
        if (st.snap_pos >= st.snapshot.size()) {
            st.done = true;
            return std::nullopt;
        }
        CursorAnswer a = std::move(st.snapshot[st.snap_pos++]);
        if (st.snap_pos == st.snapshot.size()) {
            st.done = true;
            st.snapshot.clear();
        }
        return a;
    }
    Table* t = st.engine ? st.engine->mutable_table(st.table) : nullptr;
    if (!t) {
        st.done = true;
        return std::nullopt;
    }
    auto accept = [&](std::size_t i, CursorAnswer* out) {
        if (!t->answers[i].visible()) return false;
        if (!st.filter && !out) return true;
        CursorAnswer a = make_cursor_answer(*t, static_cast<std::uint32_t>(i));
        if (!filter_accepts(st.filter, a)) return false;
        if (out) *out = std::move(a);
        return true;
    };
    CursorAnswer result;
    bool found = false;
    while (st.pos < t->answers.size() && !found) found = accept(st.pos++, &result);
    if (!found) {
        release(st);
        return std::nullopt;
    }
    // Release the table as soon as nothing is left so that updates need not
    // preserve an exhausted view.
    bool more = false;
    for (std::size_t i = st.pos; i < t->answers.size() && !more; ++i) more = accept(i, nullptr);
    if (!more) release(st);
    return result;
}

void Cursor::close() {
    if (!st_) return;
    release(*st_);
    st_->snapshot.clear();
    st_.reset();
}

} // namespace inctab
