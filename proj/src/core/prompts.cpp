#include "prompts.hpp"

namespace misq::prompts {

const std::string &mis_generation_halueval() {
    static const std::string p =
        "You are a language expert. You should create a question that includes subtle "
        "mistakes derived from the content in the knowledge.\n\n"
        "The modified question should retain the general meaning of the original but "
        "introduce small errors or misdirecting details such as incorrect entity names, "
        "relationships, times, or terminology. These changes should be subtle and should "
        "not drastically alter the original question's structure or core intent.\n\n"
        "Do not introduce completely new concepts, terms, or laws that may cause the "
        "mistake question to deviate too far from the original. The mistake question "
        "should still be recognizable as a version of the original question, with enough "
        "misleading elements to potentially cause an incorrect answer if not identified "
        "and corrected.\n\n"
        "The goal is to create a subtle version of the original question that misleads "
        "the model, but does not make it so different that the answer is hard to "
        "recover.\n\n"
        "Do not provide any content, only the misleading question.";
    return p;
}

const std::string &mis_generation_cqa() {
    static const std::string p =
        "You are a language expert. Your task is to take a given question and modify it "
        "by introducing distracting or irrelevant details to make the problem more "
        "complex and harder to answer. These distractions should not directly lead to "
        "any of the answer choices, especially the correct one.\n\n"
        "Steps:\n\n"
        "1. Modify the Question: Add irrelevant or distracting details that make the "
        "question more challenging. These distractions can be excessive descriptions, "
        "background information, or other elements that do not directly relate to the "
        "core of the question.\n\n"
        "2. Provide a Detailed Explanation: After modifying the question, provide a "
        "clear explanation that shows why the correct answer is still valid. The "
        "explanation should demonstrate that the added distractions don't affect the "
        "reasoning behind the correct answer and why it is still the best choice.\n\n"
        "Important Notes:\n"
        "The distractions should increase the complexity of the question, but should "
        "not directly or indirectly guide the reader to the correct answer.\n"
        "The explanation should clearly outline why the correct answer is the best "
        "choice and how the added distractions do not change the fundamental reasoning.";
    return p;
}

const std::string &detection() {
    static const std::string p =
        "You are an excellent mistake detector.\n\n"
        "I will provide you with a #knowledge# and a #question#. Your task is to "
        "carefully compare the #knowledge# and the #question#, and based on the content "
        "of the #knowledge#, determine whether the #question# contains any mistake.\n\n"
        "If it contains a mistake, output 'YES', otherwise output 'NO'. Please make "
        "sure there are no extra outputs.\n\n"
        "You need to do your best to identify whether there is any content in the "
        "#question# that contradicts the #knowledge#, and if there is, output \"YES\", "
        "otherwise output \"NO\".";
    return p;
}

const std::string &correction() {
    static const std::string p =
        "You are an excellent mistake corrector.\n"
        "I will provide you with a #knowledge# and a #question#. Your task is to "
        "carefully compare the #knowledge# and the #question#, and based on the content "
        "of the #knowledge# and real-world information, correct any mistakes in the "
        "#question# and output the corrected content.\n\n"
        "You need to carefully identify if there is any content in the #question# that "
        "contradicts the #knowledge# or real-world knowledge. If there is, please "
        "modify the #question# to the correct form and output it. Otherwise, directly "
        "output the original #question#.";
    return p;
}

const std::string &answering() {
    static const std::string p =
        "You are an expert with broad knowledge.\n"
        "I will provide #knowledge# and #question#. Your task is to answer the "
        "#question# based on the #knowledge# and real-world information, and output "
        "the answer to the #question#.\n\n"
        "You need to ensure that the answer you provide contains no content that "
        "contradicts the #knowledge# or real-world knowledge.";
    return p;
}

std::string format_fields(const std::optional<std::string> &knowledge,
                          const std::string &question,
                          const std::optional<std::vector<std::string>> &choices) {
    std::string out;
    if (knowledge) {
        out += "#knowledge#: \"" + *knowledge + "\"\n\n";
    }
    out += "#question#: \"" + question + "\"";
    if (choices) {
        out += "\n\n#choices#: [";
        for (std::size_t i = 0; i < choices->size(); ++i) {
            if (i) out += ", ";
            out += "\"" + (*choices)[i] + "\"";
        }
        out += "]";
    }
    return out;
}

} // namespace misq::prompts
