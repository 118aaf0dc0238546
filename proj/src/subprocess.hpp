#pragma once

#include <sys/types.h>

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tenq::proc {

// Child process with piped stdin/stdout, read line by line with timeouts.
class Subprocess {
public:
    // argv[0] is looked up on PATH. Throws Error when fork/exec plumbing fails.
    explicit Subprocess(const std::vector<std::string>& argv);
    ~Subprocess();
    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    // False when the child has closed its stdin.
    bool write_line(std::string_view line);
    // nullopt on timeout or EOF; eof() tells them apart.
    std::optional<std::string> read_line(std::chrono::milliseconds timeout);
    bool eof() const { return eof_; }

    void close_stdin();
    // Exit status once the child exits within the timeout, else nullopt.
    std::optional<int> wait(std::chrono::milliseconds timeout);
    void kill();
    pid_t pid() const { return pid_; }

private:
    pid_t pid_ = -1;
    int in_fd_ = -1;   // parent writes
    int out_fd_ = -1;  // parent reads
    std::string buffer_;
    bool eof_ = false;
    std::optional<int> status_;
};

// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(std::string_view command);

}  // namespace tenq::proc
