#include <algorithm>

#include "curator/curation.hpp"
#include "curator/digest.hpp"
#include "curator/errors.hpp"
#include "curator/export/package.hpp"
#include "curator/export/xml.hpp"
#include "curator/store.hpp"

namespace curator {

namespace {

using xml::escape;

/// Decides how an element type is rendered under a profile: as selected
/// content, as a plain group around selected descendants, or not at all.
class PathFilter {
public:
    explicit PathFilter(const ExportProfile& p) {
        sets_.push_back(p.selection.empty() ? std::vector<ElementPath>{ElementPath{}} : p.selection);
        if (p.detail == Detail::Summary) sets_.push_back(p.summary_paths);
    }

    [[nodiscard]] bool content(const ElementPath& path) const {
        return std::all_of(sets_.begin(), sets_.end(), [&](const auto& set) { return covered(set, path); });
    }

    [[nodiscard]] bool reachable(const ElementPath& path) const {
        return std::all_of(sets_.begin(), sets_.end(), [&](const auto& set) { return covered(set, path) || on_route(set, path); });
    }

private:
    static bool covered(const std::vector<ElementPath>& set, const ElementPath& p) {
        return std::any_of(set.begin(), set.end(), [&](const auto& s) { return s.is_prefix_of(p); });
    }
    static bool on_route(const std::vector<ElementPath>& set, const ElementPath& p) {
        return std::any_of(set.begin(), set.end(), [&](const auto& s) { return p.is_prefix_of(s) && p != s; });
    }

    std::vector<std::vector<ElementPath>> sets_;
};

std::string indent(int level) { return std::string(static_cast<std::size_t>(level) * 2, ' '); }

std::string attr(std::string_view name, std::string_view value) {
    return " " + std::string(name) + "=\"" + escape(value, true) + "\"";
}

std::string heading(int depth, std::string_view text) {
    const auto h = "h" + std::to_string(std::clamp(depth, 2, 6));
    return "<" + h + ">" + escape(text) + "</" + h + ">";
}

std::string page_file(const std::string& doc_id) { return id_token(doc_id) + ".html"; }

std::string resource_file(const Resource& r) { return "resources/" + r.id + "." + extension_for_media_type(r.media_type); }

struct RenderContext {
    const Collection& c;
    const ExportProfile& profile;
    PathFilter filter;
    std::string doc_id;
    std::vector<std::string> assets;
};

std::string title_of(const Document& doc) {
    std::string found;
    for_each_instance(doc.root, InstancePath{}, [&](const ElementInstance& inst, const InstancePath&) {
        if (found.empty() && inst.name == "Title" && inst.text() && !inst.text()->empty()) found = *inst.text();
    });
    return found.empty() ? doc.id : found;
}

bool has_quizzes(const Document& doc) { return !document_quizzes(doc).empty(); }

bool has_selected_content(const ElementInstance& node, const ElementPath& at, const PathFilter& filter) {
    const auto* kids = node.children();
    if (!kids) return false;
    for (const auto& k : *kids) {
        if (k.kind() == ElementKind::Quiz) continue;
        const auto p = at.child(k.name);
        if (filter.content(p)) return true;
        if (filter.reachable(p) && has_selected_content(k, p, filter)) return true;
    }
    return false;
}

bool page_exists(const Collection& c, const ExportProfile& profile, const std::string& doc_id) {
    auto it = c.documents.find(doc_id);
    if (it == c.documents.end()) return false;
    if (profile.document_filter) {
        const auto& f = *profile.document_filter;
        if (std::find(f.begin(), f.end(), doc_id) == f.end()) return false;
    }
    if (profile.include_quizzes && has_quizzes(it->second)) return true;
    return has_selected_content(it->second.root, ElementPath{}, PathFilter(profile));
}

void render_figure(RenderContext& ctx, const Resource& r, const InstancePath& ip, const std::string& label, int level, std::string& out) {
    std::vector<const Annotation*> notes;
    for (const auto& [id, a] : ctx.c.annotations) {
        if (a.resource_id == r.id) notes.push_back(&a);
    }
    std::optional<ImageSize> size;
    std::string src;
    if (r.kind == ResourceKind::LocalFile) {
        if (!r.data) throw DomainError("missing-resource", "/resources/" + r.id, "resource " + r.id + " has no bytes");
        size = probe_image_size(*r.data);
        src = resource_file(r);
        ctx.assets.push_back(src);
    } else {
        src = r.locator;
    }
    out += indent(level) + "<figure class=\"image\"" + attr("data-path", ip.str()) + attr("data-resource", r.id) + ">\n";
    std::string frame_style = "position:relative";
    if (size) frame_style += ";width:" + std::to_string(size->width) + "px;height:" + std::to_string(size->height) + "px";
    out += indent(level + 1) + "<div class=\"frame\"" + attr("style", frame_style) + ">\n";
    out += indent(level + 2) + "<img" + attr("src", src) + attr("alt", label);
    if (size) out += attr("width", std::to_string(size->width)) + attr("height", std::to_string(size->height));
    out += "/>\n";
    for (std::size_t i = 0; i < notes.size(); ++i) {
        const auto& reg = notes[i]->region;
        const auto style = "position:absolute;left:" + std::to_string(reg.x) + "px;top:" + std::to_string(reg.y) +
                           "px;width:" + std::to_string(reg.w) + "px;height:" + std::to_string(reg.h) + "px";
        out += indent(level + 2) + "<span class=\"marker\"" + attr("data-annotation", notes[i]->id) + attr("style", style) + ">" +
               std::to_string(i + 1) + "</span>\n";
    }
    out += indent(level + 1) + "</div>\n";
    if (!notes.empty()) {
        out += indent(level + 1) + "<figcaption>\n" + indent(level + 2) + "<ol class=\"annotations\">\n";
        for (const auto* a : notes) {
            out += indent(level + 3) + "<li" + attr("id", "annotation-" + a->id) + attr("data-annotation", a->id) + ">" + escape(a->comment);
            if (!a->author.empty()) out += " <span class=\"author\">" + escape(a->author) + "</span>";
            out += "</li>\n";
        }
        out += indent(level + 2) + "</ol>\n" + indent(level + 1) + "</figcaption>\n";
    }
    out += indent(level) + "</figure>\n";
}

void render_link(RenderContext& ctx, const LinkTarget& link, const InstancePath& ip, int level, std::string& out) {
    std::string href;
    std::string label = link.value;
    switch (link.kind) {
        case LinkKind::InternalDocument:
            if (auto it = ctx.c.documents.find(link.value); it != ctx.c.documents.end()) {
                label = title_of(it->second);
                if (page_exists(ctx.c, ctx.profile, link.value)) href = page_file(link.value);
            }
            break;
        case LinkKind::InternalAnnotation:
            if (auto it = ctx.c.annotations.find(link.value); it != ctx.c.annotations.end()) {
                label = it->second.comment;
                href = "#annotation-" + link.value;
            }
            break;
        case LinkKind::ExternalUrl:
            href = link.value;
            break;
    }
    out += indent(level) + "<p class=\"link\"" + attr("data-path", ip.str()) + attr("data-link-kind", to_string(link.kind)) + ">";
    if (href.empty()) {
        out += "<span>" + escape(label) + "</span>";
    } else {
        out += "<a" + attr("href", href) + ">" + escape(label) + "</a>";
    }
    out += "</p>\n";
}

void render_value(RenderContext& ctx, const ElementInstance& inst, const InstancePath& ip, int level, std::string& out) {
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                out += indent(level) + "<p class=\"value\"" + attr("data-path", ip.str()) + ">" + escape(v) + "</p>\n";
            } else if constexpr (std::is_same_v<T, ResourceRef>) {
                auto it = ctx.c.resources.find(v.resource_id);
                if (it == ctx.c.resources.end()) {
                    throw DomainError("missing-resource", ip.str(), "unknown resource " + v.resource_id);
                }
                const auto& r = it->second;
                if (r.media_type.starts_with("image/")) {
                    render_figure(ctx, r, ip, inst.name, level, out);
                } else {
                    std::string href = r.locator;
                    if (r.kind == ResourceKind::LocalFile) {
                        if (!r.data) throw DomainError("missing-resource", ip.str(), "resource " + r.id + " has no bytes");
                        href = resource_file(r);
                        ctx.assets.push_back(href);
                    }
                    out += indent(level) + "<p class=\"resource\"" + attr("data-path", ip.str()) + "><a" + attr("href", href) + ">" +
                           escape(inst.name) + "</a></p>\n";
                }
            } else if constexpr (std::is_same_v<T, LinkTarget>) {
                render_link(ctx, v, ip, level, out);
            }
        },
        inst.payload);
}

// Renders the children of `node`. Returns true if anything was written.
bool render_children(RenderContext& ctx, const ElementInstance& node, const InstancePath& at, bool inside_content, int depth,
                     int level, std::string& out);

bool render_node(RenderContext& ctx, const ElementInstance& inst, const InstancePath& ip, bool inside_content, int depth, int level,
                 std::string& out) {
    if (inst.kind() == ElementKind::Quiz) return false;
    const auto type_path = ip.type_path();
    const bool content = ctx.filter.content(type_path);
    if (!content && !ctx.filter.reachable(type_path)) return false;
    const auto type_attr = attr("data-type", type_path.str());

    if (!content) {
        std::string inner;
        if (!render_children(ctx, inst, ip, false, depth, level + 1, inner)) return false;
        out += indent(level) + "<div class=\"group\"" + type_attr + ">\n" + inner + indent(level) + "</div>\n";
        return true;
    }
    const std::string tag = inside_content ? "div" : "section";
    out += indent(level) + "<" + tag + " class=\"el\"" + type_attr + ">\n";
    out += indent(level + 1) + heading(depth, inst.name) + "\n";
    if (inst.children()) {
        render_children(ctx, inst, ip, true, depth + 1, level + 1, out);
    } else {
        render_value(ctx, inst, ip, level + 1, out);
    }
    out += indent(level) + "</" + tag + ">\n";
    return true;
}

bool render_children(RenderContext& ctx, const ElementInstance& node, const InstancePath& at, bool inside_content, int depth,
                     int level, std::string& out) {
    bool any = false;
    std::map<std::string, std::size_t, std::less<>> seen;
    for (const auto& k : *node.children()) {
        const auto ip = at.child(k.name, seen[k.name]++);
        any = render_node(ctx, k, ip, inside_content, depth, level, out) || any;
    }
    return any;
}

void render_quiz_block(const Document& doc, int level, std::string& out) {
    std::string inner;
    for_each_instance(doc.root, InstancePath{}, [&](const ElementInstance& inst, const InstancePath& ip) {
        const auto* q = std::get_if<Mcq>(&inst.payload);
        if (!q) return;
        inner += indent(level + 1) + "<div class=\"question\"" + attr("data-path", ip.str()) + ">\n";
        inner += indent(level + 2) + "<p class=\"stem\">" + escape(q->stem) + "</p>\n";
        inner += indent(level + 2) + "<ol class=\"choices\">\n";
        for (const auto& choice : q->choices) inner += indent(level + 3) + "<li>" + escape(choice) + "</li>\n";
        inner += indent(level + 2) + "</ol>\n" + indent(level + 1) + "</div>\n";
    });
    if (inner.empty()) return;
    out += indent(level) + "<section class=\"quiz\">\n" + indent(level + 1) + heading(2, "Quiz") + "\n" + inner + indent(level) + "</section>\n";
}

std::string page_head(const std::string& title, bool scorm_runtime) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE html>\n";
    out += "<html xmlns=\"http://www.w3.org/1999/xhtml\" lang=\"en\">\n";
    out += "  <head>\n    <meta charset=\"utf-8\"/>\n    <title>" + escape(title) + "</title>\n";
    out += "    <link rel=\"stylesheet\" href=\"assets/style.css\"/>\n";
    if (scorm_runtime) out += "    <script src=\"scorm/sco.js\"></script>\n";
    out += "  </head>\n";
    return out;
}

std::string js_string(std::string_view s) {
    // JSON string literals are valid JavaScript; escape '<' and '>' as well
    // so no "</script" sequence can appear.
    auto dumped = nlohmann::json(std::string(s)).dump(-1, ' ', true);
    std::string out;
    for (char ch : dumped) {
        if (ch == '<') {
            out += "\\u003c";
        } else if (ch == '>') {
            out += "\\u003e";
        } else {
            out += ch;
        }
    }
    return out;
}

}  // namespace

std::vector<Mcq> document_quizzes(const Document& doc) {
    std::vector<Mcq> out;
    for_each_instance(doc.root, InstancePath{}, [&](const ElementInstance& inst, const InstancePath&) {
        if (const auto* q = std::get_if<Mcq>(&inst.payload)) out.push_back(*q);
    });
    return out;
}

RenderedPage render_document_html(const Collection& c, const std::string& doc_id, const ExportProfile& profile) {
    auto it = c.documents.find(doc_id);
    if (it == c.documents.end()) throw DomainError("unknown-document", doc_id, "unknown document " + doc_id);
    const auto& doc = it->second;
    RenderContext ctx{c, profile, PathFilter(profile), doc_id, {}};
    const auto title = title_of(doc);

    std::string body;
    RenderedPage page;
    page.has_content = render_children(ctx, doc.root, InstancePath{}, false, 2, 3, body);
    if (profile.include_quizzes) {
        const auto before = body.size();
        render_quiz_block(doc, 3, body);
        page.has_content = page.has_content || body.size() != before;
    }

    auto& out = page.html;
    out = page_head(title, profile.format == PackageFormat::Scorm12);
    out += "  <body" + attr("data-doc", doc_id) + " data-role=\"document\">\n";
    out += "    <article class=\"document\">\n";
    out += "      <h1>" + escape(title) + "</h1>\n";
    out += body;
    out += "    </article>\n  </body>\n</html>\n";

    std::sort(ctx.assets.begin(), ctx.assets.end());
    ctx.assets.erase(std::unique(ctx.assets.begin(), ctx.assets.end()), ctx.assets.end());
    page.assets = std::move(ctx.assets);
    return page;
}

std::string render_quiz_html(const Collection& c, const std::string& doc_id, const std::vector<Mcq>& questions) {
    auto it = c.documents.find(doc_id);
    if (it == c.documents.end()) throw DomainError("unknown-document", doc_id, "unknown document " + doc_id);
    const auto title = title_of(it->second) + " - Quiz";
    std::string out = page_head(title, false);
    out += "  <body" + attr("data-doc", doc_id) + " data-role=\"quiz\">\n";
    out += "    <h1>" + escape(title) + "</h1>\n";
    out += "    <form id=\"quiz\" class=\"quiz\" action=\"#\">\n";
    for (std::size_t i = 0; i < questions.size(); ++i) {
        const auto& q = questions[i];
        const auto name = "q" + std::to_string(i);
        out += "      <fieldset class=\"question\"" + attr("data-question", std::to_string(i)) + ">\n";
        out += "        <legend>" + escape(q.stem) + "</legend>\n";
        for (std::size_t k = 0; k < q.choices.size(); ++k) {
            out += "        <label><input type=\"radio\"" + attr("name", name) + attr("value", std::to_string(k)) + "/> " +
                   escape(q.choices[k]) + "</label>\n";
        }
        out += "      </fieldset>\n";
    }
    out += "      <button type=\"button\" id=\"submit\">Submit</button>\n";
    out += "      <p id=\"result\"></p>\n";
    out += "    </form>\n";
    out += "    <script" + attr("src", "scorm/" + id_token(doc_id) + "-quiz.js") + "></script>\n";
    out += "  </body>\n</html>\n";
    return out;
}

std::string render_quiz_script(const std::vector<Mcq>& questions) {
    std::string key;
    std::string explanations;
    for (std::size_t i = 0; i < questions.size(); ++i) {
        if (i) {
            key += ", ";
            explanations += ", ";
        }
        key += std::to_string(questions[i].correct_index);
        explanations += questions[i].explanation ? js_string(*questions[i].explanation) : "null";
    }
    std::string s;
    s += "(function () {\n";
    s += "  \"use strict\";\n";
    s += "  // Index of the correct choice for each question.\n";
    s += "  var KEY = [" + key + "];\n";
    s += "  var EXPLANATIONS = [" + explanations + "];\n";
    s += R"JS(
  function searchApi(win) {
    var hops = 0;
    while (win && !win.API && win.parent && win.parent !== win && hops < 500) {
      hops += 1;
      win = win.parent;
    }
    return win && win.API ? win.API : null;
  }

  function findApi() {
    var api = searchApi(window);
    if (!api && window.opener) {
      api = searchApi(window.opener);
    }
    return api;
  }

  var api = findApi();
  var initialized = false;
  var finished = false;

  function initialize() {
    if (api && !initialized) {
      initialized = true;
      api.LMSInitialize("");
    }
  }

  function answers() {
    var out = [];
    for (var i = 0; i < KEY.length; i += 1) {
      var chosen = -1;
      var inputs = document.getElementsByName("q" + i);
      for (var k = 0; k < inputs.length; k += 1) {
        if (inputs[k].checked) {
          chosen = parseInt(inputs[k].value, 10);
        }
      }
      out.push(chosen);
    }
    return out;
  }

  function score(chosen) {
    var correct = 0;
    for (var i = 0; i < KEY.length; i += 1) {
      if (chosen[i] === KEY[i]) {
        correct += 1;
      }
    }
    return Math.round(100 * correct / KEY.length);
  }

  function submit() {
    if (finished) {
      return;
    }
    finished = true;
    var s = score(answers());
    if (api) {
      api.LMSSetValue("cmi.core.score.raw", String(s));
      api.LMSSetValue("cmi.core.lesson_status", "completed");
      api.LMSCommit("");
      api.LMSFinish("");
    }
    var result = document.getElementById("result");
    if (result) {
      result.textContent = "Score: " + s + "%";
    }
  }

  initialize();
  var button = document.getElementById("submit");
  if (button) {
    button.addEventListener("click", submit);
  }
  window.curatorQuiz = { key: KEY, explanations: EXPLANATIONS, score: score, submit: submit };
})();
)JS";
    return s;
}

}  // namespace curator
