#ifndef BEAMSCHED_NET_HPP
#define BEAMSCHED_NET_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "beamsched/errors.hpp"

namespace beamsched {

// Minimal blocking TCP wrappers; everything the protocol needs and no more.
class Connection {
public:
    Connection() = default;
    explicit Connection(int fd) : fd_(fd) {}
    ~Connection();

    Connection(Connection&& other) noexcept;
    Connection& operator=(Connection&& other) noexcept;
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    bool open() const { return fd_ >= 0; }

    // next \n-terminated line without the terminator; nullopt on EOF
    std::optional<std::string> read_line();
    void write_all(std::string_view data);
    void close();

private:
    int fd_ = -1;
    std::string buffer_;
};

class Listener {
public:
    // Binds and listens; port 0 picks an ephemeral port (see port()).
    Listener(const std::string& host, std::uint16_t port);
    ~Listener();

    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    std::uint16_t port() const { return port_; }
    // nullopt when the listener was shut down
    std::optional<Connection> accept();
    void shutdown();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

Connection connect_to(const std::string& host, std::uint16_t port);

} // namespace beamsched

#endif
