#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bridgesim {

// Thin blocking TCP wrapper for the wall-clock transport.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    TcpStream(TcpStream&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
    TcpStream& operator=(TcpStream&& o) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;
    ~TcpStream();

    static TcpStream connect(const std::string& host, uint16_t port);

    // Returns bytes read; 0 means the peer closed.
    size_t read_some(std::span<uint8_t> buf);
    void write_all(std::span<const uint8_t> data);
    void shutdown_write();
    void close();
    bool valid() const { return fd_ >= 0; }

private:
    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    TcpListener(TcpListener&& o) noexcept : fd_(o.fd_), port_(o.port_) { o.fd_ = -1; }
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    ~TcpListener();

    // Binds 127.0.0.1 on an ephemeral port.
    static TcpListener bind_loopback();

    uint16_t port() const { return port_; }
    TcpStream accept_one();
    void close();

private:
    int fd_ = -1;
    uint16_t port_ = 0;
};

}  // namespace bridgesim
