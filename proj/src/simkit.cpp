#include "bridgesim/simkit.hpp"

#include <json.hpp>
#include <stdexcept>

namespace bridgesim {

void VirtualClock::schedule(TimeNs t, std::function<void()> fn) {
    if (t < now_) throw std::invalid_argument("cannot schedule into the past");
    queue_.push(Event{t, next_order_++, std::move(fn)});
}

void VirtualClock::dispatch() {
    // Moving the function out keeps the queue reentrant for schedules made
    // inside the callback.
    Event ev = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = ev.t;
    ev.fn();
}

size_t VirtualClock::run_until(TimeNs t_end) {
    size_t n = 0;
    while (!queue_.empty() && queue_.top().t <= t_end) {
        dispatch();
        ++n;
    }
    if (t_end > now_) now_ = t_end;
    return n;
}

bool VirtualClock::step(TimeNs t_max) {
    if (queue_.empty() || queue_.top().t > t_max) return false;
    dispatch();
    return true;
}

size_t VirtualClock::run_all(size_t max_events) {
    size_t n = 0;
    while (!queue_.empty() && n < max_events) {
        dispatch();
        ++n;
    }
    return n;
}

TimeNs VirtualClock::next_time() const {
    if (queue_.empty()) throw std::logic_error("no pending events");
    return queue_.top().t;
}

double sample_latency_ms(const JitterModel& m, Rng& rng) {
    if (m.base_ms < 0.0 || m.tail_prob < 0.0 || m.tail_prob > 1.0)
        throw std::invalid_argument("invalid jitter model");
    // Draw even when tail_prob pins the outcome so the stream consumption
    // is identical for every configuration.
    const double u = uniform01(rng);
    return u < m.tail_prob ? m.base_ms + m.tail_extra_ms : m.base_ms;
}

SimChannel::SimChannel(VirtualClock& clock, const JitterModel& jitter, uint64_t seed)
    : clock_(clock), jitter_(jitter), rng_(seed) {}

uint32_t SimChannel::send(Payload payload) {
    Message m;
    m.seq = next_seq_++;
    m.t_send_ns = static_cast<uint64_t>(clock_.now());
    m.payload = std::move(payload);

    Pending p;
    p.seq = m.seq;
    p.t_send = clock_.now();
    p.bytes = encode(m);
    TimeNs arrive = clock_.now() + ms_to_ns(sample_latency_ms(jitter_, rng_));
    if (arrive < last_arrive_) arrive = last_arrive_;  // stream ordering
    last_arrive_ = arrive;
    p.t_arrive = arrive;
    pending_.push_back(std::move(p));

    clock_.schedule(arrive, [this] {
        if (!pending_.empty() && pending_.front().t_arrive <= clock_.now()) deliver_front();
    });
    return next_seq_ - 1;
}

void SimChannel::flush_due(TimeNs t) {
    while (!pending_.empty() && pending_.front().t_arrive <= t) deliver_front();
}

void SimChannel::deliver_front() {
    Pending p = std::move(pending_.front());
    pending_.pop_front();
    ++delivered_;
    log_.push_back(LatencySample{p.seq, p.t_send, p.t_arrive, -1});
    auto msgs = parser_.feed(p.bytes);
    if (receiver_)
        for (const auto& m : msgs) receiver_(m, p.t_arrive);
}

static void merge_jitter(const nlohmann::json& j, JitterModel& m) {
    if (j.contains("base_ms")) m.base_ms = j["base_ms"].get<double>();
    if (j.contains("tail_prob")) m.tail_prob = j["tail_prob"].get<double>();
    if (j.contains("tail_extra_ms")) m.tail_extra_ms = j["tail_extra_ms"].get<double>();
}

std::string SimConfig::to_json() const {
    nlohmann::json j;
    j["clock"] = clock;
    j["seed"] = seed;
    j["control_period_ms"] = control_period_ms;
    j["motor_period_ms"] = motor_period_ms;
    j["dof"] = dof;
    j["uplink"] = {{"base_ms", uplink.base_ms},
                   {"tail_prob", uplink.tail_prob},
                   {"tail_extra_ms", uplink.tail_extra_ms}};
    j["downlink"] = {{"base_ms", downlink.base_ms},
                     {"tail_prob", downlink.tail_prob},
                     {"tail_extra_ms", downlink.tail_extra_ms}};
    j["servo"] = {{"omega_n", servo.omega_n}, {"zeta", servo.zeta}, {"substeps", servo.substeps}};
    j["base_max_speed"] = base_max_speed;
    j["gripper_rate"] = gripper_rate;
    return j.dump(2) + "\n";
}

SimConfig SimConfig::from_json(const std::string& text) {
    SimConfig cfg;
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("clock")) cfg.clock = j["clock"].get<std::string>();
    if (cfg.clock != "virtual" && cfg.clock != "wall")
        throw std::invalid_argument("clock must be 'virtual' or 'wall'");
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("control_period_ms")) cfg.control_period_ms = j["control_period_ms"].get<double>();
    if (j.contains("motor_period_ms")) cfg.motor_period_ms = j["motor_period_ms"].get<double>();
    if (j.contains("dof")) cfg.dof = j["dof"].get<int>();
    if (j.contains("uplink")) merge_jitter(j["uplink"], cfg.uplink);
    if (j.contains("downlink")) merge_jitter(j["downlink"], cfg.downlink);
    if (j.contains("servo")) {
        const auto& s = j["servo"];
        if (s.contains("omega_n")) cfg.servo.omega_n = s["omega_n"].get<double>();
        if (s.contains("zeta")) cfg.servo.zeta = s["zeta"].get<double>();
        if (s.contains("substeps")) cfg.servo.substeps = s["substeps"].get<int>();
    }
    if (j.contains("base_max_speed")) cfg.base_max_speed = j["base_max_speed"].get<double>();
    if (j.contains("gripper_rate")) cfg.gripper_rate = j["gripper_rate"].get<double>();
    if (cfg.control_period_ms <= 0.0 || cfg.motor_period_ms <= 0.0 || cfg.dof <= 0)
        throw std::invalid_argument("periods and dof must be positive");
    return cfg;
}

}  // namespace bridgesim
