#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <arpa/inet.h>
#include <cerrno>
#include <fcntl.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "chorex/codec.hpp"
#include "chorex/message.hpp"

namespace chorex {

struct Delivery {
    int to_slot = -1;   // mem transport routing
    RoleName to_role;   // tcp routing (from the civ token)
    Message msg;
};

/// Moves messages between actors. Deliveries are queued and drained by the
/// session scheduler one at a time, so interleavings stay controllable;
/// each (sender, receiver) pair is FIFO.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const Address& from, const Address& to, Message m, long step) = 0;
    virtual void poll() {}
    virtual std::vector<std::uint64_t> ready_channels(long step) const = 0;
    virtual Delivery take(std::uint64_t chan) = 0;
    virtual Address make_address(int slot) = 0;
    virtual int undeliverable() const { return undeliverable_; }
    /// Messages queued but not yet deliverable (e.g. behind a test gate).
    virtual bool has_undelivered() const { return false; }

protected:
    int undeliverable_ = 0;
};

class MemTransport final : public Transport {
public:
    void send(const Address& from, const Address& to, Message m, long) override {
        if (to.slot < 0) {
            ++undeliverable_;
            return;
        }
        std::uint64_t key = chan_key(from.slot, to.slot);
        channels_[key].push_back(Delivery{to.slot, {}, std::move(m)});
    }

    std::vector<std::uint64_t> ready_channels(long step) const override {
        std::vector<std::uint64_t> out;
        for (const auto& [key, q] : channels_) {
            if (q.empty()) continue;
            auto gate = gates_.find(key);
            if (gate != gates_.end() && step < gate->second) continue;
            out.push_back(key);
        }
        return out;
    }

    Delivery take(std::uint64_t chan) override {
        auto& q = channels_.at(chan);
        Delivery d = std::move(q.front());
        q.pop_front();
        return d;
    }

    Address make_address(int slot) override { return Address{Address::Kind::Mem, "", 0, slot}; }

    bool has_undelivered() const override {
        for (const auto& [key, q] : channels_)
            if (!q.empty()) return true;
        return false;
    }

    /// Test hook: messages on (from, to) become deliverable only at `step`.
    void hold_channel(int from_slot, int to_slot, long until_step) {
        gates_[chan_key(from_slot, to_slot)] = until_step;
    }

private:
    static std::uint64_t chan_key(int from, int to) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) |
               static_cast<std::uint32_t>(to);
    }

    std::map<std::uint64_t, std::deque<Delivery>> channels_;
    std::map<std::uint64_t, long> gates_;
};

/// Localhost TCP: one listener per session, one lazily opened connection per
/// directed actor pair, length-prefixed frames. Messages route to actors by
/// the receiver role in their civ token, so frames addressed to a replaced
/// actor reach the replacement and die on the epoch check.
class TcpTransport final : public Transport {
public:
    TcpTransport() {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw std::runtime_error("tcp: socket failed");
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw std::runtime_error("tcp: bind failed");
        if (::listen(listen_fd_, 64) != 0) throw std::runtime_error("tcp: listen failed");
        socklen_t len = sizeof addr;
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
        set_nonblocking(listen_fd_);
    }

    ~TcpTransport() override {
        for (auto& [key, fd] : out_conns_) ::close(fd);
        for (auto& c : in_conns_)
            if (c.fd >= 0) ::close(c.fd);
        if (listen_fd_ >= 0) ::close(listen_fd_);
    }

    int port() const { return port_; }

    void send(const Address& from, const Address& to, Message m, long) override {
        int fd = connection_to(from.slot, to);
        if (fd < 0) {
            ++undeliverable_;
            return;
        }
        Bytes frame;
        try {
            frame = encode_frame(m);
        } catch (const CodecError&) {
            ++undeliverable_;
            return;
        }
        auto& buf = out_bufs_[fd];
        buf.insert(buf.end(), frame.begin(), frame.end());
        flush(fd);
    }

    void poll() override {
        // accept anything pending
        while (true) {
            int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) break;
            set_nonblocking(fd);
            in_conns_.push_back(InConn{fd, {}, {}});
        }
        for (auto& [fd, buf] : out_bufs_)
            if (!buf.empty()) flush(fd);
        std::uint8_t chunk[4096];
        for (auto& c : in_conns_) {
            if (c.fd < 0) continue;
            while (true) {
                ssize_t n = ::recv(c.fd, chunk, sizeof chunk, 0);
                if (n > 0) {
                    c.buf.insert(c.buf.end(), chunk, chunk + n);
                } else if (n == 0) {
                    ::close(c.fd);
                    c.fd = -1;
                    break;
                } else {
                    break; // EAGAIN or error; retry next poll
                }
            }
            // drain complete frames
            while (true) {
                Message m;
                try {
                    if (decode_frame(c.buf, m) != FrameStatus::Ok) break;
                } catch (const CodecError&) {
                    ++undeliverable_;
                    if (c.fd >= 0) ::close(c.fd);
                    c.fd = -1;
                    c.buf.clear();
                    break;
                }
                RoleName to = m.civ ? m.civ->receiver : RoleName{};
                c.inbound.push_back(Delivery{-1, std::move(to), std::move(m)});
            }
        }
    }

    std::vector<std::uint64_t> ready_channels(long) const override {
        std::vector<std::uint64_t> out;
        for (size_t i = 0; i < in_conns_.size(); ++i)
            if (!in_conns_[i].inbound.empty()) out.push_back(static_cast<std::uint64_t>(i));
        return out;
    }

    Delivery take(std::uint64_t chan) override {
        auto& q = in_conns_[static_cast<size_t>(chan)].inbound;
        Delivery d = std::move(q.front());
        q.pop_front();
        return d;
    }

    Address make_address(int slot) override {
        return Address{Address::Kind::Tcp, "127.0.0.1", port_, slot};
    }

private:
    struct InConn {
        int fd = -1;
        Bytes buf;
        std::deque<Delivery> inbound;
    };

    static void set_nonblocking(int fd) {
        int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    }

    int connection_to(int from_slot, const Address& to) {
        std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from_slot)) << 32) |
                            static_cast<std::uint32_t>(to.slot);
        auto it = out_conns_.find(key);
        if (it != out_conns_.end()) return it->second;
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) return -1;
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<std::uint16_t>(to.port));
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
            ::close(fd);
            return -1;
        }
        set_nonblocking(fd);
        out_conns_[key] = fd;
        return fd;
    }

    void flush(int fd) {
        auto& buf = out_bufs_[fd];
        while (!buf.empty()) {
            ssize_t n = ::send(fd, buf.data(), buf.size(), MSG_NOSIGNAL);
            if (n <= 0) break; // EAGAIN: retry on next poll
            buf.erase(buf.begin(), buf.begin() + n);
        }
    }

    int listen_fd_ = -1;
    int port_ = 0;
    std::map<std::uint64_t, int> out_conns_;
    std::map<int, Bytes> out_bufs_;
    std::vector<InConn> in_conns_;
};

/// Post-recovery route update: point `role` at its replacement address.
inline NetworkConfig update_route(NetworkConfig table, const RoleName& role, const Address& addr) {
    auto it = table.find(role);
    if (it == table.end()) throw std::runtime_error("update_route: unknown role " + role);
    it->second = addr;
    return table;
}

} // namespace chorex
