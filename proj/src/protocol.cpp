#include "bridgesim/protocol.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace bridgesim {

namespace {

void put_u8(std::vector<uint8_t>& b, uint8_t v) { b.push_back(v); }

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v));
    b.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<uint8_t>& b, double v) { put_u64(b, std::bit_cast<uint64_t>(v)); }

// Bounded little-endian reader; overrun() is checked by the caller per frame.
class Reader {
public:
    explicit Reader(std::span<const uint8_t> buf) : buf_(buf) {}

    uint8_t u8() { return take(1) ? buf_[pos_++] : 0; }

    uint16_t u16() {
        if (!take(2)) return 0;
        uint16_t v = static_cast<uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    uint32_t u32() {
        if (!take(4)) return 0;
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    uint64_t u64() {
        if (!take(8)) return 0;
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    size_t pos() const { return pos_; }
    bool overrun() const { return overrun_; }
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    bool take(size_t n) {
        if (overrun_ || pos_ + n > buf_.size()) {
            overrun_ = true;
            return false;
        }
        return true;
    }

    std::span<const uint8_t> buf_;
    size_t pos_ = 0;
    bool overrun_ = false;
};

size_t payload_size(const Payload& p) {
    struct Sizer {
        size_t operator()(const GoalBase&) const { return 4 * 8; }
        size_t operator()(const GoalGripper&) const { return 1 + 8; }
        size_t operator()(const GoalArmTrajectory& g) const {
            return 1 + 2 + 4 + g.traj.points.size() * (8 + 8 * static_cast<size_t>(g.traj.dof));
        }
        size_t operator()(const ArmRefSample& s) const { return 1 + 2 + 8 * s.q.size(); }
        size_t operator()(const Ack&) const { return 4 + 1; }
        size_t operator()(const Feedback&) const { return 4 + 8; }
        size_t operator()(const Result&) const { return 4 + 1; }
    };
    return std::visit(Sizer{}, p);
}

void encode_payload(std::vector<uint8_t>& b, const Payload& p) {
    struct Enc {
        std::vector<uint8_t>& b;
        void operator()(const GoalBase& g) const {
            put_f64(b, g.vx);
            put_f64(b, g.vy);
            put_f64(b, g.wz);
            put_f64(b, g.duration);
        }
        void operator()(const GoalGripper& g) const {
            put_u8(b, static_cast<uint8_t>(g.side));
            put_f64(b, g.position);
        }
        void operator()(const GoalArmTrajectory& g) const {
            put_u8(b, static_cast<uint8_t>(g.side));
            put_u16(b, static_cast<uint16_t>(g.traj.dof));
            put_u32(b, static_cast<uint32_t>(g.traj.points.size()));
            for (const auto& pt : g.traj.points) {
                put_f64(b, pt.t);
                for (double q : pt.q) put_f64(b, q);
            }
        }
        void operator()(const ArmRefSample& s) const {
            put_u8(b, static_cast<uint8_t>(s.side));
            put_u16(b, static_cast<uint16_t>(s.q.size()));
            for (double q : s.q) put_f64(b, q);
        }
        void operator()(const Ack& a) const {
            put_u32(b, a.goal_seq);
            put_u8(b, a.status);
        }
        void operator()(const Feedback& f) const {
            put_u32(b, f.goal_seq);
            put_f64(b, f.progress);
        }
        void operator()(const Result& r) const {
            put_u32(b, r.goal_seq);
            put_u8(b, r.status);
        }
    };
    std::visit(Enc{b}, p);
}

}  // namespace

const char* to_string(WireError e) {
    switch (e) {
        case WireError::none: return "none";
        case WireError::incomplete_frame: return "incomplete frame";
        case WireError::unknown_type: return "unknown message type";
        case WireError::length_mismatch: return "length mismatch";
        case WireError::count_mismatch: return "count/length inconsistency";
        case WireError::oversize: return "oversize payload";
        case WireError::bad_value: return "bad field value";
    }
    return "?";
}

std::optional<WireError> validate(const Message& m) {
    if (payload_size(m.payload) > kMaxPayloadBytes) return WireError::oversize;
    struct Check {
        std::optional<WireError> operator()(const GoalBase& g) const {
            for (double x : {g.vx, g.vy, g.wz, g.duration})
                if (!std::isfinite(x)) return WireError::bad_value;
            if (g.duration < 0.0) return WireError::bad_value;
            return std::nullopt;
        }
        std::optional<WireError> operator()(const GoalGripper& g) const {
            if (!std::isfinite(g.position) || g.position < 0.0 || g.position > 1.0)
                return WireError::bad_value;
            return std::nullopt;
        }
        std::optional<WireError> operator()(const GoalArmTrajectory& g) const {
            if (g.traj.points.empty()) return WireError::count_mismatch;
            if (g.traj.dof <= 0 || g.traj.dof > UINT16_MAX) return WireError::count_mismatch;
            for (const auto& pt : g.traj.points)
                if (static_cast<int>(pt.q.size()) != g.traj.dof) return WireError::count_mismatch;
            return std::nullopt;
        }
        std::optional<WireError> operator()(const ArmRefSample& s) const {
            if (s.q.empty() || s.q.size() > UINT16_MAX) return WireError::count_mismatch;
            return std::nullopt;
        }
        std::optional<WireError> operator()(const Ack&) const { return std::nullopt; }
        std::optional<WireError> operator()(const Feedback& f) const {
            if (!std::isfinite(f.progress) || f.progress < 0.0 || f.progress > 1.0)
                return WireError::bad_value;
            return std::nullopt;
        }
        std::optional<WireError> operator()(const Result&) const { return std::nullopt; }
    };
    return std::visit(Check{}, m.payload);
}

std::vector<uint8_t> encode(const Message& m) {
    if (auto err = validate(m))
        throw std::invalid_argument(std::string("invalid message: ") + to_string(*err));

    const size_t psize = payload_size(m.payload);
    const uint32_t length = static_cast<uint32_t>(1 + 4 + 8 + psize);

    std::vector<uint8_t> b;
    b.reserve(4 + length);
    put_u32(b, length);
    put_u8(b, static_cast<uint8_t>(m.type()));
    put_u32(b, m.seq);
    put_u64(b, m.t_send_ns);
    encode_payload(b, m.payload);
    return b;
}

DecodeResult decode(std::span<const uint8_t> buf) {
    DecodeResult r;
    if (buf.size() < 4) {
        r.error = WireError::incomplete_frame;
        return r;
    }
    Reader head(buf);
    const uint32_t length = head.u32();
    if (length < 1 + 4 + 8) {
        r.error = WireError::length_mismatch;
        return r;
    }
    if (length > 1 + 4 + 8 + kMaxPayloadBytes) {
        r.error = WireError::oversize;
        return r;
    }
    if (buf.size() < 4 + static_cast<size_t>(length)) {
        r.error = WireError::incomplete_frame;
        return r;
    }

    Reader in(buf.subspan(4, length));
    const uint8_t tag = in.u8();
    if (tag < 1 || tag > 7) {
        r.error = WireError::unknown_type;
        return r;
    }
    r.msg.seq = in.u32();
    r.msg.t_send_ns = in.u64();

    switch (static_cast<MsgType>(tag)) {
        case MsgType::goal_base: {
            GoalBase g;
            g.vx = in.f64();
            g.vy = in.f64();
            g.wz = in.f64();
            g.duration = in.f64();
            r.msg.payload = g;
            break;
        }
        case MsgType::goal_gripper: {
            GoalGripper g;
            const uint8_t side = in.u8();
            g.position = in.f64();
            if (side > 1) {
                r.error = WireError::bad_value;
                return r;
            }
            g.side = static_cast<Side>(side);
            r.msg.payload = g;
            break;
        }
        case MsgType::goal_arm_trajectory: {
            GoalArmTrajectory g;
            const uint8_t side = in.u8();
            const uint16_t dof = in.u16();
            const uint32_t n = in.u32();
            if (side > 1) {
                r.error = WireError::bad_value;
                return r;
            }
            if (dof == 0 || n == 0) {
                r.error = WireError::count_mismatch;
                return r;
            }
            // Counts must account for exactly the bytes the frame carries.
            const size_t want = static_cast<size_t>(n) * (8 + 8 * static_cast<size_t>(dof));
            if (want != length - (1 + 4 + 8) - (1 + 2 + 4)) {
                r.error = WireError::count_mismatch;
                return r;
            }
            g.side = static_cast<Side>(side);
            g.traj.dof = dof;
            g.traj.points.resize(n);
            for (auto& pt : g.traj.points) {
                pt.t = in.f64();
                pt.q.resize(dof);
                for (auto& q : pt.q) q = in.f64();
            }
            r.msg.payload = std::move(g);
            break;
        }
        case MsgType::arm_ref_sample: {
            ArmRefSample s;
            const uint8_t side = in.u8();
            const uint16_t dof = in.u16();
            if (side > 1) {
                r.error = WireError::bad_value;
                return r;
            }
            if (dof == 0) {
                r.error = WireError::count_mismatch;
                return r;
            }
            if (static_cast<size_t>(dof) * 8 != length - (1 + 4 + 8) - (1 + 2)) {
                r.error = WireError::count_mismatch;
                return r;
            }
            s.side = static_cast<Side>(side);
            s.q.resize(dof);
            for (auto& q : s.q) q = in.f64();
            r.msg.payload = std::move(s);
            break;
        }
        case MsgType::ack: {
            Ack a;
            a.goal_seq = in.u32();
            a.status = in.u8();
            r.msg.payload = a;
            break;
        }
        case MsgType::feedback: {
            Feedback f;
            f.goal_seq = in.u32();
            f.progress = in.f64();
            r.msg.payload = f;
            break;
        }
        case MsgType::result: {
            Result res;
            res.goal_seq = in.u32();
            res.status = in.u8();
            r.msg.payload = res;
            break;
        }
    }

    if (in.overrun() || !in.exhausted()) {
        r.error = WireError::length_mismatch;
        return r;
    }
    r.consumed = 4 + length;
    return r;
}

std::vector<Message> FrameParser::feed(std::span<const uint8_t> chunk) {
    std::vector<Message> out;
    if (broken()) return out;
    buf_.insert(buf_.end(), chunk.begin(), chunk.end());
    size_t off = 0;
    while (true) {
        DecodeResult r = decode(std::span<const uint8_t>(buf_).subspan(off));
        if (r.error == WireError::incomplete_frame) break;
        if (!r.ok()) {
            error_ = r.error;
            buf_.clear();
            return out;
        }
        out.push_back(std::move(r.msg));
        off += r.consumed;
    }
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<long>(off));
    return out;
}

}  // namespace bridgesim
