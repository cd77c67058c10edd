#include "curator/import/medpix.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <regex>
#include <thread>

#include <httplib.h>

#include "curator/digest.hpp"
#include "curator/errors.hpp"
#include "curator/import/importers.hpp"
#include "curator/store.hpp"

namespace curator {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

class FileTransport : public Transport {
public:
    explicit FileTransport(fs::path root) : root_(std::move(root)) {
        if (!fs::is_directory(root_)) throw IoError("source directory not found: " + root_.string());
    }

    HttpResponse get(const std::string& relative) override {
        if (relative.find("..") != std::string::npos) return {400, ""};
        const auto p = root_ / relative;
        std::error_code ec;
        if (!fs::is_regular_file(p, ec)) return {404, ""};
        const auto bytes = read_file(p);
        return {200, std::string(bytes.begin(), bytes.end())};
    }

    [[nodiscard]] bool remote() const override { return false; }

private:
    fs::path root_;
};

class HttpTransport : public Transport {
public:
    HttpTransport(std::string origin, std::string prefix) : origin_(std::move(origin)), prefix_(std::move(prefix)) {}

    HttpResponse get(const std::string& relative) override {
        httplib::Client client(origin_);
        client.set_connection_timeout(10);
        client.set_read_timeout(30);
        client.set_follow_location(true);
        auto res = client.Get(prefix_ + "/" + relative);
        if (!res) throw IoError("network failure fetching " + origin_ + prefix_ + "/" + relative + ": " + httplib::to_string(res.error()));
        return {res->status, res->body};
    }

    [[nodiscard]] bool remote() const override { return true; }

private:
    std::string origin_;
    std::string prefix_;
};

/// Spaces requests evenly across all threads.
class RateLimiter {
public:
    explicit RateLimiter(double per_second) : per_second_(per_second) {}

    void acquire() {
        if (per_second_ <= 0) return;
        const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(1.0 / per_second_));
        std::chrono::steady_clock::time_point slot;
        {
            std::lock_guard lock(mutex_);
            slot = std::max(std::chrono::steady_clock::now(), next_);
            next_ = slot + interval;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    double per_second_;
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_{};
};

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (!failed) {
                    const auto i = next++;
                    if (i >= n) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        failed = true;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

/// Transport wrapper adding rate limiting, request counting and the resume
/// cache. Successful (2xx) responses are cached under the state directory.
class Fetcher {
public:
    Fetcher(Transport& transport, const MedpixOptions& options)
        : transport_(transport), limiter_(options.requests_per_second), state_dir_(options.state_dir), base_url_(options.base_url) {
        if (!state_dir_) return;
        const auto cursor = *state_dir_ / ".import-cursor";
        std::error_code ec;
        if (!fs::exists(cursor, ec)) return;
        try {
            const auto bytes = read_file(cursor);
            const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
            if (j.value("base_url", "") != base_url_) return;
            for (const auto& p : j.at("done")) done_.insert(p.get<std::string>());
        } catch (const std::exception&) {
            done_.clear();
        }
    }

    HttpResponse get(const std::string& relative) {
        if (auto cached = from_cache(relative)) {
            ++cached_;
            return {200, std::move(*cached)};
        }
        if (transport_.remote()) limiter_.acquire();
        ++requests_;
        auto res = transport_.get(relative);
        if (res.status >= 500) throw IoError("server error " + std::to_string(res.status) + " fetching " + relative);
        if (res.status >= 200 && res.status < 300) store(relative, res.body);
        return res;
    }

    ojson get_json(const std::string& relative) {
        auto res = get(relative);
        if (res.status != 200) throw IoError("HTTP " + std::to_string(res.status) + " fetching " + relative);
        try {
            return ojson::parse(res.body);
        } catch (const ojson::parse_error& e) {
            throw DomainError("malformed-input", relative, "malformed response for " + relative + ": " + e.what());
        }
    }

    void save_cursor() {
        if (!state_dir_) return;
        std::lock_guard lock(mutex_);
        nlohmann::json j = {{"base_url", base_url_}, {"done", done_}};
        write_file_atomic(*state_dir_ / ".import-cursor", j.dump(1) + "\n");
    }

    void clear_state() {
        if (!state_dir_) return;
        std::error_code ec;
        fs::remove(*state_dir_ / ".import-cursor", ec);
        fs::remove_all(*state_dir_ / ".import-cache", ec);
    }

    [[nodiscard]] std::size_t requests() const { return requests_; }
    [[nodiscard]] std::size_t cached() const { return cached_; }

private:
    [[nodiscard]] fs::path cache_file(const std::string& relative) const {
        return *state_dir_ / ".import-cache" / content_id(relative);
    }

    std::optional<std::string> from_cache(const std::string& relative) {
        if (!state_dir_) return std::nullopt;
        {
            std::lock_guard lock(mutex_);
            if (!done_.contains(relative)) return std::nullopt;
        }
        try {
            const auto bytes = read_file(cache_file(relative));
            return std::string(bytes.begin(), bytes.end());
        } catch (const IoError&) {
            return std::nullopt;
        }
    }

    void store(const std::string& relative, const std::string& body) {
        if (!state_dir_) return;
        write_file_atomic(cache_file(relative), body);
        std::lock_guard lock(mutex_);
        done_.insert(relative);
    }

    Transport& transport_;
    RateLimiter limiter_;
    std::optional<fs::path> state_dir_;
    std::string base_url_;
    std::mutex mutex_;
    std::set<std::string> done_;
    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> cached_{0};
};

template <typename T>
void take_first(std::vector<T>& v, const std::optional<std::size_t>& limit) {
    if (limit && v.size() > *limit) v.resize(*limit);
}

void append_unique(std::vector<std::string>& out, std::set<std::string>& seen, const std::vector<std::string>& items) {
    for (const auto& s : items) {
        if (seen.insert(s).second) out.push_back(s);
    }
}

std::vector<std::string> string_list(const ojson& j, const char* key) {
    std::vector<std::string> out;
    if (!j.contains(key)) return out;
    for (const auto& v : j.at(key)) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    return out;
}

}  // namespace

std::unique_ptr<Transport> open_transport(const std::string& base_url) {
    static const std::regex http_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (std::regex_match(base_url, m, http_re)) {
        std::string prefix = m[2].matched ? m[2].str() : "";
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
        return std::make_unique<HttpTransport>(m[1].str(), prefix);
    }
    if (base_url.starts_with("file://")) return std::make_unique<FileTransport>(fs::path(base_url.substr(7)));
    if (base_url.find("://") != std::string::npos) throw IoError("unsupported URL scheme: " + base_url);
    return std::make_unique<FileTransport>(fs::path(base_url));
}

namespace medpix {

std::string case_path(const std::string& id) { return "cases/" + id + ".json"; }
std::string topic_path(const std::string& id) { return "topics/" + id + ".json"; }
std::string question_path(const std::string& id) { return "questions/" + id + ".json"; }
std::string image_path(const std::string& file) { return "images/" + file; }
std::string topic_document_id(const std::string& topic_id) { return "topic-" + topic_id; }

std::string first_page(const ojson& index) { return index.value("first_page", std::string("cases/page-1.json")); }

Page parse_page(const ojson& page) {
    Page p;
    p.case_ids = string_list(page, "cases");
    if (page.contains("next") && page.at("next").is_string()) p.next = page.at("next").get<std::string>();
    return p;
}

CaseRefs case_refs(const ojson& case_json) {
    CaseRefs refs;
    refs.topics = string_list(case_json, "topics");
    refs.questions = string_list(case_json, "questions");
    if (case_json.contains("images")) {
        for (const auto& img : case_json.at("images")) refs.images.push_back(img.at("file").get<std::string>());
    }
    return refs;
}

Mcq map_question(const ojson& q) {
    Mcq m;
    m.stem = q.at("stem").get<std::string>();
    m.choices = q.at("choices").get<std::vector<std::string>>();
    m.correct_index = q.at("answer").get<std::size_t>();
    if (q.contains("explanation") && q.at("explanation").is_string()) m.explanation = q.at("explanation").get<std::string>();
    return m;
}

namespace {

ojson without(const ojson& j, std::initializer_list<const char*> keys) {
    ojson out = ojson::object();
    for (const auto& item : j.items()) {
        const auto& k = item.key();
        if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; })) out[k] = item.value();
    }
    return out;
}

}  // namespace

RawRecord map_topic(const std::string& topic_id, const ojson& topic) {
    RawRecord r;
    r.source_id = topic_document_id(topic_id);
    r.locator = topic_path(topic_id);
    r.tree.push_back({"Topic", json_to_tree(without(topic, {"id"}), {})});
    return r;
}

RawRecord map_case(const std::string& case_id, const ojson& case_json, const std::set<std::string>& topics,
                   const std::map<std::string, Mcq>& questions, const std::map<std::string, BlobPtr>& images) {
    RawTree body = json_to_tree(without(case_json, {"id", "topics", "questions", "images"}), {});
    for (const auto& t : string_list(case_json, "topics")) {
        if (topics.contains(t)) body.push_back({"Topics", LinkTarget{LinkKind::InternalDocument, topic_document_id(t)}});
    }
    for (const auto& q : string_list(case_json, "questions")) {
        if (auto it = questions.find(q); it != questions.end()) body.push_back({"Quiz", it->second});
    }
    if (case_json.contains("images")) {
        RawTree list;
        for (const auto& img : case_json.at("images")) {
            const auto file = img.at("file").get<std::string>();
            auto it = images.find(file);
            if (it == images.end()) continue;
            RawTree image;
            const auto dot = file.rfind('.');
            image.push_back({"File", RawResource{media_type_for_extension(dot == std::string::npos ? "" : file.substr(dot + 1)),
                                                 image_path(file), it->second}});
            for (auto& f : json_to_tree(without(img, {"file", "source_url"}), {})) image.push_back(std::move(f));
            if (img.contains("source_url")) {
                image.push_back({"OriginalImage", LinkTarget{LinkKind::ExternalUrl, img.at("source_url").get<std::string>()}});
            }
            list.push_back({"Image", std::move(image)});
        }
        if (!list.empty()) body.push_back({"Images", std::move(list)});
    }
    RawRecord r;
    r.source_id = case_id;
    r.locator = case_path(case_id);
    r.tree.push_back({"Cases", std::move(body)});
    return r;
}

}  // namespace medpix

MedpixRecords medpix_fetch(const MedpixOptions& options, Transport* transport) {
    std::unique_ptr<Transport> owned;
    if (!transport) {
        owned = open_transport(options.base_url);
        transport = owned.get();
    }
    Fetcher fetcher(*transport, options);
    MedpixRecords out;
    std::mutex out_mutex;

    try {
        // Pages are walked in order until the case limit is reached.
        std::vector<std::string> case_ids;
        {
            std::set<std::string> seen;
            std::optional<std::string> page = medpix::first_page(fetcher.get_json(std::string(medpix::kIndex)));
            std::set<std::string> visited;
            while (page && (!options.max_cases || case_ids.size() < *options.max_cases)) {
                if (!visited.insert(*page).second) break;
                auto parsed = medpix::parse_page(fetcher.get_json(*page));
                append_unique(case_ids, seen, parsed.case_ids);
                page = parsed.next;
            }
            take_first(case_ids, options.max_cases);
        }

        std::vector<std::optional<ojson>> cases(case_ids.size());
        parallel_for(case_ids.size(), options.parallelism, [&](std::size_t i) {
            auto res = fetcher.get(medpix::case_path(case_ids[i]));
            std::lock_guard lock(out_mutex);
            if (res.status >= 400) {
                ++out.skipped;
                out.errors.push_back("case " + case_ids[i] + ": HTTP " + std::to_string(res.status));
                return;
            }
            try {
                cases[i] = ojson::parse(res.body);
            } catch (const ojson::parse_error& e) {
                ++out.skipped;
                out.errors.push_back("case " + case_ids[i] + ": malformed response: " + e.what());
            }
        });

        std::vector<std::string> topic_ids, question_ids, image_files;
        {
            std::set<std::string> seen_t, seen_q, seen_i;
            for (const auto& c : cases) {
                if (!c) continue;
                auto refs = medpix::case_refs(*c);
                append_unique(topic_ids, seen_t, refs.topics);
                append_unique(question_ids, seen_q, refs.questions);
                append_unique(image_files, seen_i, refs.images);
            }
            take_first(topic_ids, options.max_topics);
            take_first(question_ids, options.max_questions);
        }

        // Details are fetched as one flat work list so the parallelism bound
        // and the rate limit cover them together.
        struct Job {
            int kind;  // 0 topic, 1 question, 2 image
            std::string id;
        };
        std::vector<Job> jobs;
        for (const auto& t : topic_ids) jobs.push_back({0, t});
        for (const auto& q : question_ids) jobs.push_back({1, q});
        for (const auto& f : image_files) jobs.push_back({2, f});

        std::map<std::string, ojson> topics;
        std::map<std::string, Mcq> questions;
        std::map<std::string, BlobPtr> images;
        parallel_for(jobs.size(), options.parallelism, [&](std::size_t i) {
            const auto& job = jobs[i];
            const auto path = job.kind == 0 ? medpix::topic_path(job.id)
                              : job.kind == 1 ? medpix::question_path(job.id)
                                              : medpix::image_path(job.id);
            auto res = fetcher.get(path);
            std::lock_guard lock(out_mutex);
            if (res.status >= 400) {
                out.errors.push_back(path + ": HTTP " + std::to_string(res.status));
                return;
            }
            try {
                if (job.kind == 0) {
                    topics.emplace(job.id, ojson::parse(res.body));
                } else if (job.kind == 1) {
                    questions.emplace(job.id, medpix::map_question(ojson::parse(res.body)));
                } else {
                    images.emplace(job.id, std::make_shared<const Bytes>(res.body.begin(), res.body.end()));
                }
            } catch (const std::exception& e) {
                out.errors.push_back(path + ": malformed response: " + e.what());
            }
        });

        std::set<std::string> topic_set;
        for (const auto& t : topic_ids) {
            auto it = topics.find(t);
            if (it == topics.end()) continue;
            topic_set.insert(t);
            out.topics.push_back(medpix::map_topic(t, it->second));
        }
        for (std::size_t i = 0; i < cases.size(); ++i) {
            if (cases[i]) out.cases.push_back(medpix::map_case(case_ids[i], *cases[i], topic_set, questions, images));
        }
        out.questions = questions.size();
        out.images = images.size();
    } catch (const IoError&) {
        fetcher.save_cursor();
        throw;
    }
    out.requests = fetcher.requests();
    out.cached = fetcher.cached();
    fetcher.clear_state();
    return out;
}

}  // namespace curator
