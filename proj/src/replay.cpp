#include "acrl/replay.hpp"

#include <istream>
#include <ostream>

namespace acrl {

DualReplay::DualReplay(std::size_t capacity, double eta0, long decay_interval,
                       double decay_factor)
    : capacity_(capacity), eta_(eta0), decay_interval_(decay_interval),
      decay_factor_(decay_factor) {
    if (capacity == 0) throw std::invalid_argument("zero capacity");
    if (eta0 < 0.0 || eta0 > 1.0) throw std::invalid_argument("eta outside [0,1]");
    if (decay_interval <= 0) throw std::invalid_argument("non-positive decay interval");
    if (decay_factor <= 0.0 || decay_factor > 1.0)
        throw std::invalid_argument("decay factor outside (0,1]");
}

void DualReplay::push(Transition t) {
    auto& buf = (t.c < 0.0) ? d_a_ : d_r_;
    if (buf.size() == capacity_) buf.pop_front();
    buf.push_back(std::move(t));
}

void DualReplay::push_real(Transition t) {
    if (d_r_.size() == capacity_) d_r_.pop_front();
    d_r_.push_back(std::move(t));
}

std::vector<Transition> DualReplay::sample_mixed(int batch, Rng& rng) const {
    if (d_r_.empty()) throw NotWarmedUp{};
    if (batch <= 0) throw std::invalid_argument("non-positive batch");
    const std::size_t want_aug = static_cast<std::size_t>(eta_ * batch);
    const std::size_t n_aug = std::min(want_aug, d_a_.size());
    const std::size_t n_real = static_cast<std::size_t>(batch) - n_aug;
    std::vector<Transition> out;
    out.reserve(batch);
    if (n_aug > 0) {
        std::uniform_int_distribution<std::size_t> pick(0, d_a_.size() - 1);
        for (std::size_t i = 0; i < n_aug; ++i) out.push_back(d_a_[pick(rng)]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, d_r_.size() - 1);
    for (std::size_t i = 0; i < n_real; ++i) out.push_back(d_r_[pick(rng)]);
    return out;
}

double DualReplay::tick_decay() {
    ++steps_seen_;
    if (steps_seen_ % decay_interval_ == 0) eta_ *= decay_factor_;
    return eta_;
}

namespace {

void write_state(std::ostream& out, const EnvState& s) {
    const std::int32_t n = static_cast<std::int32_t>(s.x.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(s.x.data()), n * sizeof(double));
    out.write(reinterpret_cast<const char*>(&s.step_index), sizeof s.step_index);
    const char d = s.done ? 1 : 0;
    out.write(&d, 1);
}

EnvState read_state(std::istream& in) {
    std::int32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || n < 0) throw std::runtime_error("corrupt replay checkpoint");
    EnvState s;
    s.x = Vec(n);
    in.read(reinterpret_cast<char*>(s.x.data()), n * sizeof(double));
    in.read(reinterpret_cast<char*>(&s.step_index), sizeof s.step_index);
    char d = 0;
    in.read(&d, 1);
    if (!in) throw std::runtime_error("corrupt replay checkpoint");
    s.done = d != 0;
    return s;
}

void write_transition(std::ostream& out, const Transition& t) {
    write_state(out, t.s);
    const std::int32_t n = static_cast<std::int32_t>(t.a.size());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(t.a.data()), n * sizeof(double));
    out.write(reinterpret_cast<const char*>(&t.r), sizeof t.r);
    out.write(reinterpret_cast<const char*>(&t.c), sizeof t.c);
    write_state(out, t.s_next);
    const char d = t.done ? 1 : 0;
    out.write(&d, 1);
    out.write(reinterpret_cast<const char*>(&t.lam.lambda_r), sizeof(double));
    out.write(reinterpret_cast<const char*>(&t.lam.lambda_c), sizeof(double));
}

Transition read_transition(std::istream& in) {
    Transition t;
    t.s = read_state(in);
    std::int32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!in || n < 0) throw std::runtime_error("corrupt replay checkpoint");
    t.a = Vec(n);
    in.read(reinterpret_cast<char*>(t.a.data()), n * sizeof(double));
    in.read(reinterpret_cast<char*>(&t.r), sizeof t.r);
    in.read(reinterpret_cast<char*>(&t.c), sizeof t.c);
    t.s_next = read_state(in);
    char d = 0;
    in.read(&d, 1);
    t.done = d != 0;
    in.read(reinterpret_cast<char*>(&t.lam.lambda_r), sizeof(double));
    in.read(reinterpret_cast<char*>(&t.lam.lambda_c), sizeof(double));
    if (!in) throw std::runtime_error("corrupt replay checkpoint");
    return t;
}

}  // namespace

void DualReplay::save(std::ostream& out) const {
    const char magic[8] = {'A', 'C', 'R', 'L', 'B', 'U', 'F', '1'};
    out.write(magic, 8);
    const std::uint64_t cap = capacity_;
    out.write(reinterpret_cast<const char*>(&cap), sizeof cap);
    out.write(reinterpret_cast<const char*>(&eta_), sizeof eta_);
    out.write(reinterpret_cast<const char*>(&decay_interval_), sizeof decay_interval_);
    out.write(reinterpret_cast<const char*>(&decay_factor_), sizeof decay_factor_);
    out.write(reinterpret_cast<const char*>(&steps_seen_), sizeof steps_seen_);
    for (const auto* buf : {&d_r_, &d_a_}) {
        const std::uint64_t sz = buf->size();
        out.write(reinterpret_cast<const char*>(&sz), sizeof sz);
        for (const auto& t : *buf) write_transition(out, t);
    }
}

DualReplay DualReplay::load(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "ACRLBUF1")
        throw std::runtime_error("bad replay checkpoint magic");
    std::uint64_t cap = 0;
    double eta = 0, factor = 0;
    long interval = 0, steps = 0;
    in.read(reinterpret_cast<char*>(&cap), sizeof cap);
    in.read(reinterpret_cast<char*>(&eta), sizeof eta);
    in.read(reinterpret_cast<char*>(&interval), sizeof interval);
    in.read(reinterpret_cast<char*>(&factor), sizeof factor);
    in.read(reinterpret_cast<char*>(&steps), sizeof steps);
    if (!in) throw std::runtime_error("corrupt replay checkpoint");
    DualReplay buf(cap, eta, interval, factor);
    buf.steps_seen_ = steps;
    for (auto* dst : {&buf.d_r_, &buf.d_a_}) {
        std::uint64_t sz = 0;
        in.read(reinterpret_cast<char*>(&sz), sizeof sz);
        if (!in) throw std::runtime_error("corrupt replay checkpoint");
        for (std::uint64_t i = 0; i < sz; ++i) dst->push_back(read_transition(in));
    }
    return buf;
}

}  // namespace acrl
