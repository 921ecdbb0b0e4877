#include "citecheck/agent.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "citecheck/serialization.hpp"

namespace citecheck {

namespace fs = std::filesystem;

FileReportAdapter::FileReportAdapter(fs::path dir) : dir_(std::move(dir)) {}

Expected<Report> FileReportAdapter::acquire(const RunSpec& spec, std::optional<int>) const {
    fs::path path = spec.report_path ? fs::path(*spec.report_path) : fs::path(spec.query_id + ".md");
    if (path.is_relative()) path = dir_ / path;
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) return make_error("missing_report", "no report at " + path.string());
    try {
        return Report{read_file(path), path.string()};
    } catch (const std::exception& e) {
        return make_error("unreadable_report", e.what());
    }
}

std::vector<std::string> split_command(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    bool in_word = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n') {
            if (in_word) out.push_back(std::move(cur));
            cur.clear();
            in_word = false;
            continue;
        }
        in_word = true;
        if (c == '\\' && i + 1 < s.size()) {
            cur.push_back(s[++i]);
        } else if (c == '\'') {
            std::size_t end = s.find('\'', i + 1);
            if (end == std::string_view::npos) throw std::invalid_argument("unterminated ' in command");
            cur.append(s.substr(i + 1, end - i - 1));
            i = end;
        } else if (c == '"') {
            std::size_t j = i + 1;
            for (; j < s.size() && s[j] != '"'; ++j) {
                if (s[j] == '\\' && j + 1 < s.size() && (s[j + 1] == '"' || s[j + 1] == '\\')) ++j;
                cur.push_back(s[j]);
            }
            if (j >= s.size()) throw std::invalid_argument("unterminated \" in command");
            i = j;
        } else {
            cur.push_back(c);
        }
    }
    if (in_word) out.push_back(std::move(cur));
    return out;
}

CommandAgentAdapter::CommandAgentAdapter(std::string command_template, int timeout_ms)
    : argv_template_(split_command(command_template)), timeout_ms_(timeout_ms) {
    if (argv_template_.empty()) throw std::invalid_argument("agent command is empty");
}

std::vector<std::string> CommandAgentAdapter::command_for(const RunSpec& spec, std::optional<int> budget) const {
    const std::string b = budget ? std::to_string(*budget) : std::string{};
    std::vector<std::string> argv;
    for (const std::string& arg : argv_template_) {
        std::string out;
        for (std::size_t i = 0; i < arg.size();) {
            if (arg.compare(i, 7, "{query}") == 0) {
                out += spec.query;
                i += 7;
            } else if (arg.compare(i, 10, "{query_id}") == 0) {
                out += spec.query_id;
                i += 10;
            } else if (arg.compare(i, 8, "{budget}") == 0) {
                out += b;
                i += 8;
            } else {
                out.push_back(arg[i++]);
            }
        }
        argv.push_back(std::move(out));
    }
    return argv;
}

Expected<Report> CommandAgentAdapter::acquire(const RunSpec& spec, std::optional<int> budget) const {
    std::vector<std::string> argv = command_for(spec, budget);
    std::string shown;
    for (const auto& a : argv) shown += (shown.empty() ? "" : " ") + a;

    int pipefd[2];
    if (pipe2(pipefd, O_CLOEXEC) != 0) return make_error("spawn_failed", std::strerror(errno));
    std::vector<char*> cargv;
    for (auto& a : argv) cargv.push_back(a.data());
    cargv.push_back(nullptr);

    pid_t pid = fork();
    if (pid < 0) {
        close(pipefd[0]);
        close(pipefd[1]);
        return make_error("spawn_failed", std::strerror(errno));
    }
    if (pid == 0) {
        dup2(pipefd[1], STDOUT_FILENO);
        int devnull = open("/dev/null", O_RDONLY);
        if (devnull >= 0) dup2(devnull, STDIN_FILENO);
        execvp(cargv[0], cargv.data());
        _exit(127);
    }
    close(pipefd[1]);

    std::string output;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    bool timed_out = false;
    char buf[8192];
    for (;;) {
        int wait_ms = -1;
        if (timeout_ms_ > 0) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) {
                timed_out = true;
                break;
            }
            wait_ms = static_cast<int>(left.count());
        }
        pollfd p{pipefd[0], POLLIN, 0};
        int rc = poll(&p, 1, wait_ms);
        if (rc < 0 && errno == EINTR) continue;
        if (rc == 0) continue;
        ssize_t n = read(pipefd[0], buf, sizeof buf);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }
    close(pipefd[0]);
    if (timed_out) kill(pid, SIGKILL);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (timed_out) return make_error("agent_timeout", "agent command timed out: " + shown);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        return make_error("agent_failed", "agent command exited with " + std::to_string(code) + ": " + shown);
    }
    return Report{std::move(output), shown};
}

std::vector<RunSpec> load_run_specs(const fs::path& path) {
    auto j = nlohmann::json::parse(read_file(path));
    const nlohmann::json& list = j.is_object() ? j.at("queries") : j;
    if (!list.is_array()) throw std::runtime_error("manifest must be a JSON array of queries");
    std::vector<RunSpec> specs;
    for (const auto& item : list) {
        RunSpec s;
        s.query_id = item.at("query_id").get<std::string>();
        s.query = item.value("query", std::string{});
        if (auto it = item.find("report_path"); it != item.end() && !it->is_null())
            s.report_path = it->get<std::string>();
        if (s.query_id.empty()) throw std::runtime_error("manifest entry without query_id");
        specs.push_back(std::move(s));
    }
    return specs;
}

}  // namespace citecheck
