/* Lower-case vowel earliest in a, e, i, o, u order that appears anywhere
   in s; '-' when there is none. */
char FirstVowel(char *s)
{
    const char *order = "aeiou";
    for (int v = 0; order[v] != '\0'; v++) {
        for (int i = 0; s[i] != '\0'; i++) {
            if (tolower((unsigned char)s[i]) == order[v]) {
                return order[v];
            }
        }
    }
    return '-';
}
