#include "cobalt/proc.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

#include "cobalt/core.hpp"

namespace cobalt {

namespace {

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

void drain(int fd, std::string& into) {
    char buf[4096];
    for (;;) {
        ssize_t n = read(fd, buf, sizeof(buf));
        if (n > 0)
            into.append(buf, static_cast<size_t>(n));
        else
            break;
    }
}

}  // namespace

std::vector<std::string> split_command(const std::string& command) {
    std::istringstream in(command);
    std::vector<std::string> parts;
    std::string part;
    while (in >> part) parts.push_back(part);
    return parts;
}

ProcessResult run_process(const std::vector<std::string>& argv, int timeout_ms) {
    if (argv.empty()) throw DomainError("run_process: empty argv");

    int out_pipe[2], err_pipe[2], exec_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0 || pipe(exec_pipe) != 0)
        throw InfraError("pipe() failed: " + std::string(strerror(errno)));
    fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);

    pid_t pid = fork();
    if (pid < 0) throw InfraError("fork() failed: " + std::string(strerror(errno)));

    if (pid == 0) {
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        close(exec_pipe[0]);
        std::vector<char*> cargv;
        cargv.reserve(argv.size() + 1);
        for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
        cargv.push_back(nullptr);
        execvp(cargv[0], cargv.data());
        int err = errno;  // exec failed: report it through the CLOEXEC pipe
        ssize_t ignored = write(exec_pipe[1], &err, sizeof(err));
        (void)ignored;
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);
    close(exec_pipe[1]);

    int exec_errno = 0;
    ssize_t got = read(exec_pipe[0], &exec_errno, sizeof(exec_errno));
    close(exec_pipe[0]);
    if (got == sizeof(exec_errno)) {
        waitpid(pid, nullptr, 0);
        close(out_pipe[0]);
        close(err_pipe[0]);
        throw InfraError("failed to execute '" + argv[0] + "': " + strerror(exec_errno));
    }

    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    ProcessResult result;
    const int64_t deadline = timeout_ms > 0 ? now_ms() + timeout_ms : 0;
    bool out_open = true, err_open = true;

    while (out_open || err_open) {
        if (deadline && now_ms() >= deadline) {
            kill(pid, SIGKILL);
            result.timed_out = true;
            break;
        }
        struct pollfd fds[2];
        nfds_t nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        int wait_ms = deadline ? static_cast<int>(std::max<int64_t>(1, deadline - now_ms())) : 200;
        poll(fds, nfds, wait_ms);
        for (nfds_t i = 0; i < nfds; i++) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            bool is_out = fds[i].fd == out_pipe[0];
            char buf[4096];
            ssize_t n = read(fds[i].fd, buf, sizeof(buf));
            if (n > 0) {
                (is_out ? result.out : result.err).append(buf, static_cast<size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) {
                (is_out ? out_open : err_open) = false;
            }
        }
    }

    if (!result.timed_out) {
        drain(out_pipe[0], result.out);
        drain(err_pipe[0], result.err);
    }
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (!result.timed_out && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

}  // namespace cobalt
